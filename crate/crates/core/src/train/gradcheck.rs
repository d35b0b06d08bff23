//! End-to-end finite-difference checks of the model + loss gradients.
//!
//! Everything is evaluated on scaled stack inputs so the ±3σ clamp of the
//! input scaler never sits inside a difference stencil.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{TrainError, TrainInstance};
use crate::dataset::{FeatureMatrix, FeatureScheme, PROTEIN_PAD};
use crate::loss::{distance_field, total_loss, StructMode};
use crate::model::{logistic, Gradients, KanStack};

/// `|a - n| / max(|a|, |n|, 1e-12)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorError {
    pub name: String,
    pub len: usize,
    pub max_rel_error: f64,
    pub max_abs_error: f64,
    pub worst_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub tensors: Vec<TensorError>,
    /// Gradient with respect to the scaled inputs of every real residue.
    pub input: TensorError,
    pub step: f64,
    pub tolerance: f64,
    pub max_rel_error: f64,
    pub passed: bool,
}

/// Analytic gradients of one instance's total loss.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceGradients {
    pub params: Gradients,
    /// One vector per real residue, in residue order.
    pub inputs: Vec<Vec<f64>>,
}

struct Problem<'a> {
    inst: &'a TrainInstance,
    lambda: f64,
    zs: Vec<Vec<f64>>,
    real: Vec<usize>,
}

impl<'a> Problem<'a> {
    fn new(stack: &KanStack, inst: &'a TrainInstance, lambda: f64) -> Self {
        let real: Vec<usize> = (0..inst.mask.len()).filter(|&i| inst.mask[i] == 1).collect();
        let zs = real
            .iter()
            .map(|&i| stack.scale_input(&inst.features.residue_input(i)))
            .collect();
        Problem { inst, lambda, zs, real }
    }

    /// Loss plus the spline signature of every residue's forward pass.
    fn loss(&self, stack: &KanStack, zs: &[Vec<f64>]) -> Result<(f64, Vec<usize>), TrainError> {
        let mut p = vec![0.0; self.inst.mask.len()];
        let mut signature = Vec::new();
        for (k, &i) in self.real.iter().enumerate() {
            let tape = stack.forward_scaled(&zs[k])?;
            p[i] = logistic(tape.logit);
            signature.extend(tape.spline_signature());
        }
        let (b, _) = total_loss(
            &p,
            &self.inst.labels,
            self.inst.field.as_ref(),
            self.lambda,
            &self.inst.mask,
            StructMode::Continuous,
        )?;
        Ok((b.total, signature))
    }
}

/// Backpropagated gradients of the composite loss (continuous structural
/// term, weight `lambda`) for one instance.
pub fn analytic_gradients(stack: &KanStack, inst: &TrainInstance, lambda: f64) -> Result<InstanceGradients, TrainError> {
    let prob = Problem::new(stack, inst, lambda);
    let mut p = vec![0.0; inst.mask.len()];
    let mut tapes = Vec::with_capacity(prob.real.len());
    for (k, &i) in prob.real.iter().enumerate() {
        let t = stack.forward_scaled(&prob.zs[k])?;
        p[i] = logistic(t.logit);
        tapes.push(t);
    }
    let (_, dl_dp) = total_loss(&p, &inst.labels, inst.field.as_ref(), lambda, &inst.mask, StructMode::Continuous)?;
    let mut params = stack.zero_grads();
    let mut inputs = Vec::with_capacity(tapes.len());
    for (k, &i) in prob.real.iter().enumerate() {
        let dlogit = dl_dp[i] * p[i] * (1.0 - p[i]);
        inputs.push(stack.backward_scaled(&tapes[k], dlogit, &mut params)?);
    }
    Ok(InstanceGradients { params, inputs })
}

type Probe<'f> = dyn FnMut(f64) -> Result<(f64, Vec<usize>), TrainError> + 'f;

/// Stencil shape for [`ridders`].
#[derive(Clone, Copy)]
enum Stencil {
    Central,
    /// One-sided difference towards `+1.0` or `-1.0`.
    OneSided(f64),
}

/// Ridders' extrapolation of finite differences: the step shrinks by `CON`
/// from `h` and the tableau entry with the smallest error estimate wins.
/// Returns the estimate and its error estimate.
fn ridders(f: &mut Probe<'_>, x: f64, h: f64, stencil: Stencil) -> Result<(f64, f64), TrainError> {
    const CON: f64 = 1.4;
    const NTAB: usize = 10;
    const SAFE: f64 = 2.0;
    // central differences have an even error series
    let (ratio, f0) = match stencil {
        Stencil::Central => (CON * CON, 0.0),
        Stencil::OneSided(_) => (CON, f(x)?.0),
    };
    let mut diff = |hh: f64| -> Result<f64, TrainError> {
        Ok(match stencil {
            Stencil::Central => (f(x + hh)?.0 - f(x - hh)?.0) / (2.0 * hh),
            Stencil::OneSided(dir) => (f(x + dir * hh)?.0 - f0) / (dir * hh),
        })
    };
    let mut a = [[0.0f64; NTAB]; NTAB];
    let mut hh = h;
    a[0][0] = diff(hh)?;
    let mut best = a[0][0];
    let mut err = f64::INFINITY;
    for i in 1..NTAB {
        hh /= CON;
        a[0][i] = diff(hh)?;
        let mut fac = ratio;
        for j in 1..=i {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= ratio;
            let e = (a[j][i] - a[j - 1][i]).abs().max((a[j][i] - a[j - 1][i - 1]).abs());
            if e <= err {
                err = e;
                best = a[j][i];
            }
        }
        if (a[i][i] - a[i - 1][i - 1]).abs() >= SAFE * err {
            break;
        }
    }
    Ok((best, err))
}

/// Smallest step tried before giving up on a clean stencil.
const MIN_STEP: f64 = 1e-7;
/// Largest initial step for parameters that barely move the loss.
const MAX_STEP: f64 = 1e3;
/// Loss change, relative to `max(1, |L|)`, below which the step grows.
const RESOLVE: f64 = 1e-8;

/// Step on one side of `x`: grows by 10x from `h` while the loss barely
/// moves, then shrinks by 4x until `x + dir * step` keeps the spline
/// signature of `x`.
fn side_step(f: &mut Probe<'_>, x: f64, h: f64, dir: f64, l0: f64, base: &[usize]) -> Result<f64, TrainError> {
    let resolve = RESOLVE * l0.abs().max(1.0);
    let mut hh = h;
    loop {
        let (l, sig) = f(x + dir * hh)?;
        if sig != base {
            break;
        }
        if (l - l0).abs() >= resolve || hh * 10.0 > MAX_STEP {
            return Ok(hh);
        }
        hh *= 10.0;
    }
    while hh > MIN_STEP {
        hh /= 4.0;
        if f(x + dir * hh)?.1 == base {
            break;
        }
    }
    Ok(hh)
}

/// Picks steps, then extrapolates. Weakly coupled parameters get larger
/// steps since the loss is near-linear in them over a wide range. Stencils
/// never leave the knot intervals every spline sees at `x`, so the loss is
/// smooth on them; the central estimate and the one-sided estimate on the
/// roomier side compete on their error estimates.
fn derivative(f: &mut Probe<'_>, x: f64, h: f64) -> Result<f64, TrainError> {
    let (l0, base) = f(x)?;
    let up = side_step(f, x, h, 1.0, l0, &base)?;
    let down = side_step(f, x, h, -1.0, l0, &base)?;
    let central = ridders(f, x, up.min(down), Stencil::Central)?;
    let (dir, reach) = if up >= down { (1.0, up) } else { (-1.0, down) };
    if reach <= up.min(down) {
        return Ok(central.0);
    }
    let one_sided = ridders(f, x, reach, Stencil::OneSided(dir))?;
    Ok(if one_sided.1 < central.1 { one_sided.0 } else { central.0 })
}

fn summarize(name: String, pairs: impl Iterator<Item = (f64, f64)>) -> TensorError {
    let mut out = TensorError {
        name,
        len: 0,
        max_rel_error: 0.0,
        max_abs_error: 0.0,
        worst_index: None,
    };
    for (k, (a, n)) in pairs.enumerate() {
        out.len += 1;
        let rel = relative_error(a, n);
        out.max_abs_error = out.max_abs_error.max((a - n).abs());
        if rel > out.max_rel_error || (rel.is_nan() && out.worst_index.is_none()) {
            out.max_rel_error = if rel.is_nan() { f64::INFINITY } else { rel };
            out.worst_index = Some(k);
        }
    }
    out
}

/// Compares the supplied analytic gradients against finite differences of
/// the loss, starting the extrapolation at `step`.
pub fn compare_gradients(
    stack: &KanStack,
    inst: &TrainInstance,
    lambda: f64,
    analytic: &InstanceGradients,
    step: f64,
    tolerance: f64,
) -> Result<GradCheckReport, TrainError> {
    let prob = Problem::new(stack, inst, lambda);
    let names = stack.tensor_names();
    let mut work = stack.clone();
    let mut tensors = Vec::new();
    for (t, name) in names.iter().enumerate() {
        let original = stack.tensors()[t].to_vec();
        if analytic.params.tensors.get(t).map(|g| g.len()) != Some(original.len()) {
            return Err(TrainError::Shape(format!("gradient tensor '{name}'")));
        }
        let mut numeric = Vec::with_capacity(original.len());
        for k in 0..original.len() {
            let mut f = |v: f64| {
                work.tensors_mut()[t][k] = v;
                prob.loss(&work, &prob.zs)
            };
            let d = derivative(&mut f, original[k], step)?;
            work.tensors_mut()[t][k] = original[k];
            numeric.push(d);
        }
        tensors.push(summarize(
            name.clone(),
            analytic.params.tensors[t].iter().copied().zip(numeric),
        ));
    }

    if analytic.inputs.len() != prob.zs.len() {
        return Err(TrainError::Shape("input gradients".into()));
    }
    let mut zs = prob.zs.clone();
    let mut pairs = Vec::new();
    for r in 0..zs.len() {
        for c in 0..zs[r].len() {
            let x0 = prob.zs[r][c];
            let mut f = |v: f64| {
                zs[r][c] = v;
                prob.loss(stack, &zs)
            };
            let d = derivative(&mut f, x0, step)?;
            zs[r][c] = x0;
            pairs.push((analytic.inputs[r][c], d));
        }
    }
    let input = summarize("input".into(), pairs.into_iter());

    let max_rel_error = tensors
        .iter()
        .chain(std::iter::once(&input))
        .map(|t| t.max_rel_error)
        .fold(0.0, f64::max);
    Ok(GradCheckReport {
        tensors,
        input,
        step,
        tolerance,
        max_rel_error,
        passed: max_rel_error < tolerance,
    })
}

/// Initial step of the extrapolation tableau.
pub const DEFAULT_STEP: f64 = 1e-2;

/// Analytic versus numeric gradients for every parameter and every scaled
/// input of a (small) instance.
pub fn gradient_check(stack: &KanStack, inst: &TrainInstance, lambda: f64, tolerance: f64) -> Result<GradCheckReport, TrainError> {
    let analytic = analytic_gradients(stack, inst, lambda)?;
    compare_gradients(stack, inst, lambda, &analytic, DEFAULT_STEP, tolerance)
}

/// Random instance of `n` residues with `dim` external features, a few
/// binding residues and three atoms per residue, for gradient checks.
pub fn random_instance(seed: u64, n: usize, dim: usize) -> TrainInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let mut labels = vec![0u8; PROTEIN_PAD];
    let mut mask = vec![0u8; PROTEIN_PAD];
    for i in 0..n {
        mask[i] = 1;
        labels[i] = rng.random_bool(0.3) as u8;
    }
    labels[rng.random_range(0..n)] = 1;
    let atoms: Vec<Vec<crate::Vec3>> = (0..n)
        .map(|_| {
            let c: crate::Vec3 = [0, 1, 2].map(|_| rng.random_range(-15.0..15.0));
            (0..3).map(|_| c.map(|v| v + rng.random_range(-1.5..1.5))).collect()
        })
        .collect();
    let field = distance_field(&atoms, &labels).expect("at least one binding residue");
    TrainInstance {
        id: format!("random{seed}"),
        features: FeatureMatrix::from_rows(&rows, dim, FeatureScheme::External, PROTEIN_PAD),
        labels,
        mask,
        field: Some(field),
    }
}
