use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dense::{DenseLayer, DenseTape};
use super::kan::{silu, silu_derivative, KanLayer, KanTape};
use super::spline::SplineGrid;
use super::{logistic, ModelError};
use crate::dataset::{FeatureMatrix, FeatureScheme};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Kan,
    Mlp,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Kan => "kan",
            Mode::Mlp => "mlp",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "kan" => Some(Mode::Kan),
            "mlp" => Some(Mode::Mlp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackConfig {
    pub mode: Mode,
    pub scheme: FeatureScheme,
    /// Per-residue feature width `D`; the stack sees `2D` (row + global row).
    pub feature_dim: usize,
    pub hidden: Vec<usize>,
    pub degree: usize,
    pub grid_size: usize,
    pub grid_range: (f64, f64),
    pub use_base: bool,
}

impl StackConfig {
    /// Two hidden KAN layers of width 64, cubic splines on 8 intervals over [-1, 1].
    pub fn new(scheme: FeatureScheme, feature_dim: usize) -> Self {
        StackConfig {
            mode: Mode::Kan,
            scheme,
            feature_dim,
            hidden: vec![64, 64],
            degree: 3,
            grid_size: 8,
            grid_range: (-1.0, 1.0),
            use_base: true,
        }
    }

    pub fn input_dim(&self) -> usize {
        2 * self.feature_dim
    }

    pub fn param_count(&self) -> usize {
        let mut n = 0;
        let mut prev = self.input_dim();
        for &w in &self.hidden {
            n += match self.mode {
                Mode::Kan => prev * w * (self.grid_size + self.degree) + if self.use_base { prev * w } else { 0 },
                Mode::Mlp => prev * w + w,
            };
            prev = w;
        }
        n + prev + 1
    }

    /// MLP with the same depth and a uniform hidden width chosen so its
    /// parameter count is as close as possible to this configuration's.
    pub fn matched_mlp(&self) -> StackConfig {
        let target = self.param_count() as f64;
        let mut best = self.clone();
        best.mode = Mode::Mlp;
        if self.hidden.is_empty() {
            return best;
        }
        let depth = self.hidden.len();
        let mut best_gap = f64::INFINITY;
        for w in 1.. {
            let mut c = best.clone();
            c.hidden = vec![w; depth];
            let n = c.param_count() as f64;
            let gap = (n - target).abs();
            if gap < best_gap {
                best_gap = gap;
                best = c;
            }
            if n > target {
                break;
            }
        }
        best
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.feature_dim == 0 {
            return Err(ModelError::InvalidConfig("feature_dim must be >= 1".into()));
        }
        if self.hidden.contains(&0) {
            return Err(ModelError::InvalidConfig("hidden widths must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-feature standardization fitted on training rows, clamped to ±3
/// standard deviations and mapped linearly onto the spline grid range.
#[derive(Debug, Clone, PartialEq)]
pub struct InputScaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl InputScaler {
    pub const CLAMP: f64 = 3.0;

    pub fn identity(dim: usize) -> Self {
        InputScaler {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    /// Population mean and standard deviation per column. Columns with
    /// (near) zero spread get a unit scale.
    pub fn fit<'a, I>(rows: I, dim: usize) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut n = 0usize;
        let mut sum = vec![0.0; dim];
        let mut sq = vec![0.0; dim];
        for r in rows {
            n += 1;
            for k in 0..dim {
                sum[k] += r[k];
                sq[k] += r[k] * r[k];
            }
        }
        if n == 0 {
            return Self::identity(dim);
        }
        let nf = n as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / nf).collect();
        let std = (0..dim)
            .map(|k| {
                let var = (sq[k] / nf - mean[k] * mean[k]).max(0.0);
                let s = var.sqrt();
                if s < 1e-12 {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        InputScaler { mean, std }
    }

    pub fn transform(&self, x: &[f64], range: (f64, f64)) -> Vec<f64> {
        let mid = 0.5 * (range.0 + range.1);
        let half = 0.5 * (range.1 - range.0);
        x.iter()
            .enumerate()
            .map(|(k, &v)| {
                let z = ((v - self.mean[k]) / self.std[k]).clamp(-Self::CLAMP, Self::CLAMP);
                mid + half * z / Self::CLAMP
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
enum Layer {
    Kan(KanLayer),
    Dense(DenseLayer),
}

#[derive(Debug, Clone)]
enum LayerTape {
    Kan(KanTape),
    Dense { tape: DenseTape, pre: Vec<f64> },
}

/// Cached activations of one residue's forward pass.
#[derive(Debug, Clone)]
pub struct StackTape {
    layers: Vec<LayerTape>,
    head: DenseTape,
    pub logit: f64,
}

impl StackTape {
    /// Spline interval of every KAN edge evaluation; within one signature
    /// the logit is a smooth function of parameters and inputs.
    pub fn spline_signature(&self) -> Vec<usize> {
        self.layers
            .iter()
            .filter_map(|l| match l {
                LayerTape::Kan(t) => Some(t.regions()),
                LayerTape::Dense { .. } => None,
            })
            .flatten()
            .collect()
    }
}

/// Probabilities for every padded residue plus tapes for the real ones.
#[derive(Debug, Clone)]
pub struct InstanceForward {
    pub probs: Vec<f64>,
    pub tapes: Vec<Option<StackTape>>,
}

/// Parameter gradients in the order of [`KanStack::tensors`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub tensors: Vec<Vec<f64>>,
}

impl Gradients {
    /// Index of the first tensor holding a non-finite entry.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.tensors.iter().position(|t| t.iter().any(|v| !v.is_finite()))
    }

    pub fn scale(&mut self, f: f64) {
        self.tensors.iter_mut().flatten().for_each(|v| *v *= f);
    }

    pub fn zero(&mut self) {
        self.tensors.iter_mut().flatten().for_each(|v| *v = 0.0);
    }
}

/// Shared per-residue network: scaled `concat(row_i, global_row)` through
/// the hidden layers, an affine head to one logit, then the logistic.
#[derive(Debug, Clone)]
pub struct KanStack {
    pub config: StackConfig,
    pub scaler: InputScaler,
    /// Seed used by the last [`KanStack::init_params`], if any.
    pub seed: Option<u64>,
    layers: Vec<Layer>,
    head: DenseLayer,
}

impl KanStack {
    /// Stack with every parameter zero and an identity scaler.
    pub fn new(config: StackConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let grid = SplineGrid::uniform(config.grid_range.0, config.grid_range.1, config.grid_size, config.degree)?;
        let mut layers = Vec::new();
        let mut prev = config.input_dim();
        for &w in &config.hidden {
            layers.push(match config.mode {
                Mode::Kan => Layer::Kan(KanLayer::new(prev, w, grid.clone(), config.use_base)),
                Mode::Mlp => Layer::Dense(DenseLayer::new(prev, w)),
            });
            prev = w;
        }
        Ok(KanStack {
            scaler: InputScaler::identity(config.input_dim()),
            seed: None,
            head: DenseLayer::new(prev, 1),
            layers,
            config,
        })
    }

    pub fn init_params(&mut self, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fill = |xs: &mut [f64], sigma: f64| {
            let d = Normal::new(0.0, sigma).expect("positive sigma");
            xs.iter_mut().for_each(|v| *v = d.sample(&mut rng));
        };
        for layer in &mut self.layers {
            match layer {
                Layer::Kan(l) => {
                    let sc = 0.1 / (l.n_basis() as f64).sqrt();
                    let sb = 1.0 / (l.in_dim as f64).sqrt();
                    let (c, b) = l.params_mut();
                    fill(c, sc);
                    fill(b, sb);
                }
                Layer::Dense(l) => {
                    let s = 1.0 / (l.in_dim as f64).sqrt();
                    let (w, b) = l.params_mut();
                    fill(w, s);
                    b.iter_mut().for_each(|v| *v = 0.0);
                }
            }
        }
        let s = 1.0 / (self.head.in_dim as f64).sqrt();
        let (w, b) = self.head.params_mut();
        fill(w, s);
        b.iter_mut().for_each(|v| *v = 0.0);
        self.seed = Some(seed);
    }

    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Kan(_) => {
                    names.push(format!("layer{k}.spline_coeffs"));
                    names.push(format!("layer{k}.base_weights"));
                }
                Layer::Dense(_) => {
                    names.push(format!("layer{k}.weights"));
                    names.push(format!("layer{k}.bias"));
                }
            }
        }
        names.push("head.weights".into());
        names.push("head.bias".into());
        names
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Kan(l) => {
                    out.push(l.spline_coeffs());
                    out.push(l.base_weights());
                }
                Layer::Dense(l) => {
                    out.push(l.weights());
                    out.push(l.bias());
                }
            }
        }
        out.push(self.head.weights());
        out.push(self.head.bias());
        out
    }

    /// Mutable parameter tensors; every tape recorded before this call is
    /// rejected by backward afterwards.
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            let (a, b) = match layer {
                Layer::Kan(l) => l.params_mut(),
                Layer::Dense(l) => l.params_mut(),
            };
            out.push(a);
            out.push(b);
        }
        let (w, b) = self.head.params_mut();
        out.push(w);
        out.push(b);
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn zero_grads(&self) -> Gradients {
        Gradients {
            tensors: self.tensors().iter().map(|t| vec![0.0; t.len()]).collect(),
        }
    }

    /// Raw `concat(row, global_row)` mapped into the grid range.
    pub fn scale_input(&self, raw: &[f64]) -> Vec<f64> {
        self.scaler.transform(raw, self.config.grid_range)
    }

    /// Logit for one already-scaled stack input.
    pub fn forward_scaled(&self, z: &[f64]) -> Result<StackTape, ModelError> {
        if z.len() != self.config.input_dim() {
            return Err(ModelError::Shape {
                what: "stack input",
                expected: self.config.input_dim(),
                found: z.len(),
            });
        }
        let mut h = z.to_vec();
        let mut tapes = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            match layer {
                Layer::Kan(l) => {
                    let (y, t) = l.forward(&h)?;
                    tapes.push(LayerTape::Kan(t));
                    h = y;
                }
                Layer::Dense(l) => {
                    let (pre, t) = l.forward(&h)?;
                    h = pre.iter().map(|&v| silu(v)).collect();
                    tapes.push(LayerTape::Dense { tape: t, pre });
                }
            }
        }
        let (y, head) = self.head.forward(&h)?;
        Ok(StackTape {
            layers: tapes,
            head,
            logit: y[0],
        })
    }

    /// Accumulates parameter gradients for `dlogit` and returns the gradient
    /// with respect to the scaled input.
    pub fn backward_scaled(&self, tape: &StackTape, dlogit: f64, grads: &mut Gradients) -> Result<Vec<f64>, ModelError> {
        if tape.layers.len() != self.layers.len() {
            return Err(ModelError::StaleTape);
        }
        let nt = grads.tensors.len();
        let (front, head_grads) = grads.tensors.split_at_mut(nt - 2);
        let (hw, hb) = head_grads.split_at_mut(1);
        let mut up = self.head.backward_into(&tape.head, &[dlogit], &mut hw[0], &mut hb[0])?;
        for (k, (layer, lt)) in self.layers.iter().zip(&tape.layers).enumerate().rev() {
            let (ga, gb) = front[2 * k..2 * k + 2].split_at_mut(1);
            up = match (layer, lt) {
                (Layer::Kan(l), LayerTape::Kan(t)) => l.backward_into(t, &up, &mut ga[0], &mut gb[0])?,
                (Layer::Dense(l), LayerTape::Dense { tape, pre }) => {
                    let local: Vec<f64> = up.iter().zip(pre).map(|(u, &p)| u * silu_derivative(p)).collect();
                    l.backward_into(tape, &local, &mut ga[0], &mut gb[0])?
                }
                _ => return Err(ModelError::StaleTape),
            };
        }
        Ok(up)
    }

    fn check_features(&self, features: &FeatureMatrix, mask: &[u8]) -> Result<(), ModelError> {
        if features.dim != self.config.feature_dim {
            return Err(ModelError::Shape {
                what: "feature dimension",
                expected: self.config.feature_dim,
                found: features.dim,
            });
        }
        if mask.len() != features.n_rows() {
            return Err(ModelError::Shape {
                what: "mask",
                expected: features.n_rows(),
                found: mask.len(),
            });
        }
        Ok(())
    }

    /// Forward pass over every residue, keeping tapes for backward.
    pub fn forward_instance(&self, features: &FeatureMatrix, mask: &[u8]) -> Result<InstanceForward, ModelError> {
        self.check_features(features, mask)?;
        let mut probs = vec![0.0; mask.len()];
        let mut tapes = Vec::with_capacity(mask.len());
        for (i, &m) in mask.iter().enumerate() {
            if m == 0 {
                tapes.push(None);
                continue;
            }
            let tape = self.forward_scaled(&self.scale_input(&features.residue_input(i)))?;
            probs[i] = logistic(tape.logit);
            tapes.push(Some(tape));
        }
        Ok(InstanceForward { probs, tapes })
    }

    /// Backpropagates `dL/dp` for every residue into `grads`.
    pub fn backward_instance(&self, fwd: &InstanceForward, dl_dp: &[f64], grads: &mut Gradients) -> Result<(), ModelError> {
        if dl_dp.len() != fwd.probs.len() {
            return Err(ModelError::Shape {
                what: "loss gradient",
                expected: fwd.probs.len(),
                found: dl_dp.len(),
            });
        }
        for (i, tape) in fwd.tapes.iter().enumerate() {
            if let Some(t) = tape {
                let p = fwd.probs[i];
                let dlogit = dl_dp[i] * p * (1.0 - p);
                if dlogit != 0.0 {
                    self.backward_scaled(t, dlogit, grads)?;
                }
            }
        }
        Ok(())
    }

    /// Per-residue binding probabilities; masked residues get exactly 0.
    pub fn predict(&self, features: &FeatureMatrix, mask: &[u8]) -> Result<Vec<f64>, ModelError> {
        self.check_features(features, mask)?;
        mask.par_iter()
            .enumerate()
            .map(|(i, &m)| {
                if m == 0 {
                    return Ok(0.0);
                }
                let t = self.forward_scaled(&self.scale_input(&features.residue_input(i)))?;
                Ok(logistic(t.logit))
            })
            .collect()
    }
}
