use super::spline::{LocalBasis, SplineGrid};
use super::{next_layer_id, ModelError};

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `x * logistic(x)`.
pub fn silu(x: f64) -> f64 {
    x * logistic(x)
}

pub fn silu_derivative(x: f64) -> f64 {
    let s = logistic(x);
    s * (1.0 + x * (1.0 - s))
}

/// One KAN layer: every input-output edge carries `base * silu(x) + spline(x)`.
///
/// `spline_coeffs` is laid out `[out_dim][in_dim][n_basis]`, `base_weights`
/// `[out_dim][in_dim]`. With the base term disabled `base_weights` is empty.
#[derive(Debug, Clone)]
pub struct KanLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub grid: SplineGrid,
    spline_coeffs: Vec<f64>,
    base_weights: Vec<f64>,
    id: u64,
    version: u64,
}

/// Activations cached by [`KanLayer::forward`].
#[derive(Debug, Clone)]
pub struct KanTape {
    layer_id: u64,
    version: u64,
    bases: Vec<LocalBasis>,
    silu: Vec<f64>,
    dsilu: Vec<f64>,
}

impl KanTape {
    /// Knot interval of every edge input, offset by one when clamped.
    pub(crate) fn regions(&self) -> impl Iterator<Item = usize> + '_ {
        self.bases.iter().map(|b| 2 * b.first + usize::from(!b.inside))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KanGrads {
    pub input: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub base: Vec<f64>,
}

impl KanLayer {
    /// Layer with all parameters zero.
    pub fn new(in_dim: usize, out_dim: usize, grid: SplineGrid, use_base: bool) -> Self {
        let nb = grid.n_basis();
        KanLayer {
            in_dim,
            out_dim,
            spline_coeffs: vec![0.0; out_dim * in_dim * nb],
            base_weights: if use_base { vec![0.0; out_dim * in_dim] } else { Vec::new() },
            grid,
            id: next_layer_id(),
            version: 0,
        }
    }

    pub fn n_basis(&self) -> usize {
        self.grid.n_basis()
    }

    pub fn uses_base(&self) -> bool {
        !self.base_weights.is_empty()
    }

    pub fn spline_coeffs(&self) -> &[f64] {
        &self.spline_coeffs
    }

    pub fn base_weights(&self) -> &[f64] {
        &self.base_weights
    }

    /// Mutable `(spline_coeffs, base_weights)`. Invalidates earlier tapes.
    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        self.version += 1;
        (&mut self.spline_coeffs, &mut self.base_weights)
    }

    pub fn param_count(&self) -> usize {
        self.spline_coeffs.len() + self.base_weights.len()
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, KanTape), ModelError> {
        if x.len() != self.in_dim {
            return Err(ModelError::Shape {
                what: "kan input",
                expected: self.in_dim,
                found: x.len(),
            });
        }
        let nb = self.n_basis();
        let bases: Vec<LocalBasis> = x.iter().map(|&v| self.grid.local_basis(v)).collect();
        let (silu_v, dsilu): (Vec<f64>, Vec<f64>) = if self.uses_base() {
            x.iter().map(|&v| (silu(v), silu_derivative(v))).unzip()
        } else {
            (Vec::new(), Vec::new())
        };
        let mut out = vec![0.0; self.out_dim];
        for (o, out_o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, lb) in bases.iter().enumerate() {
                let edge = (o * self.in_dim + i) * nb + lb.first;
                let c = &self.spline_coeffs[edge..edge + lb.len];
                for k in 0..lb.len {
                    acc += c[k] * lb.values[k];
                }
                if self.uses_base() {
                    acc += self.base_weights[o * self.in_dim + i] * silu_v[i];
                }
            }
            *out_o = acc;
        }
        let tape = KanTape {
            layer_id: self.id,
            version: self.version,
            bases,
            silu: silu_v,
            dsilu,
        };
        Ok((out, tape))
    }

    fn check_tape(&self, tape: &KanTape) -> Result<(), ModelError> {
        if tape.layer_id != self.id || tape.version != self.version || tape.bases.len() != self.in_dim {
            return Err(ModelError::StaleTape);
        }
        Ok(())
    }

    /// Accumulates parameter gradients into the given buffers and returns
    /// the gradient with respect to the layer input.
    pub fn backward_into(
        &self,
        tape: &KanTape,
        upstream: &[f64],
        coeff_grad: &mut [f64],
        base_grad: &mut [f64],
    ) -> Result<Vec<f64>, ModelError> {
        self.check_tape(tape)?;
        if upstream.len() != self.out_dim {
            return Err(ModelError::Shape {
                what: "kan upstream gradient",
                expected: self.out_dim,
                found: upstream.len(),
            });
        }
        let nb = self.n_basis();
        let mut input = vec![0.0; self.in_dim];
        for (o, &u) in upstream.iter().enumerate() {
            if u == 0.0 {
                continue;
            }
            for (i, lb) in tape.bases.iter().enumerate() {
                let edge = (o * self.in_dim + i) * nb + lb.first;
                let c = &self.spline_coeffs[edge..edge + lb.len];
                let g = &mut coeff_grad[edge..edge + lb.len];
                let mut dx = 0.0;
                for k in 0..lb.len {
                    g[k] += u * lb.values[k];
                    dx += c[k] * lb.derivs[k];
                }
                if self.uses_base() {
                    let w = o * self.in_dim + i;
                    base_grad[w] += u * tape.silu[i];
                    dx += self.base_weights[w] * tape.dsilu[i];
                }
                input[i] += u * dx;
            }
        }
        Ok(input)
    }

    pub fn backward(&self, tape: &KanTape, upstream: &[f64]) -> Result<KanGrads, ModelError> {
        let mut coeffs = vec![0.0; self.spline_coeffs.len()];
        let mut base = vec![0.0; self.base_weights.len()];
        let input = self.backward_into(tape, upstream, &mut coeffs, &mut base)?;
        Ok(KanGrads { input, coeffs, base })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::spline::bspline_basis;
    use rand::{Rng, SeedableRng};

    fn grid() -> SplineGrid {
        SplineGrid::uniform(-1.0, 1.0, 8, 3).unwrap()
    }

    fn random_layer(in_dim: usize, out_dim: usize, seed: u64) -> KanLayer {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut l = KanLayer::new(in_dim, out_dim, grid(), true);
        let (c, b) = l.params_mut();
        c.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        b.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        l
    }

    #[test]
    fn zero_layer_zero_output() {
        let l = KanLayer::new(4, 3, grid(), true);
        let (y, _) = l.forward(&[0.3, -0.2, 0.9, 5.0]).unwrap();
        assert_eq!(y, vec![0.0; 3]);
    }

    #[test]
    fn unit_base_at_zero() {
        let mut l = KanLayer::new(2, 1, grid(), true);
        l.params_mut().1.iter_mut().for_each(|w| *w = 1.0);
        assert_eq!(l.forward(&[0.0, 0.0]).unwrap().0, vec![0.0]);
    }

    #[test]
    fn matches_scalar_reevaluation() {
        let l = random_layer(3, 2, 5);
        let x = [0.31, -0.77, 0.05];
        let (y, _) = l.forward(&x).unwrap();
        let nb = l.n_basis();
        for o in 0..2 {
            let mut expect = 0.0;
            for i in 0..3 {
                let b = bspline_basis(x[i], &l.grid);
                for k in 0..nb {
                    expect += l.spline_coeffs()[(o * 3 + i) * nb + k] * b[k];
                }
                expect += l.base_weights()[o * 3 + i] * x[i] / (1.0 + (-x[i]).exp());
            }
            assert!((y[o] - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn wrong_input_length() {
        let l = KanLayer::new(3, 2, grid(), true);
        assert!(matches!(l.forward(&[0.0; 2]), Err(ModelError::Shape { .. })));
    }

    #[test]
    fn zero_upstream_zero_grads() {
        let l = random_layer(3, 2, 1);
        let (_, tape) = l.forward(&[0.1, 0.2, 0.3]).unwrap();
        let g = l.backward(&tape, &[0.0, 0.0]).unwrap();
        assert!(g.input.iter().chain(&g.coeffs).chain(&g.base).all(|&v| v == 0.0));
    }

    #[test]
    fn stale_tape_rejected() {
        let mut l = random_layer(3, 2, 1);
        let (_, tape) = l.forward(&[0.1, 0.2, 0.3]).unwrap();
        l.params_mut();
        assert!(matches!(l.backward(&tape, &[1.0, 1.0]), Err(ModelError::StaleTape)));
        let other = random_layer(3, 2, 1);
        let (_, tape) = other.forward(&[0.1, 0.2, 0.3]).unwrap();
        assert!(matches!(l.backward(&tape, &[1.0, 1.0]), Err(ModelError::StaleTape)));
    }

    #[test]
    fn single_edge_finite_difference() {
        let mut l = random_layer(1, 1, 3);
        let x = [0.4];
        let (_, tape) = l.forward(&x).unwrap();
        let g = l.backward(&tape, &[1.0]).unwrap();
        let h = 1e-5;
        let f = |l: &KanLayer, x: f64| l.forward(&[x]).unwrap().0[0];
        let fd = (f(&l, x[0] + h) - f(&l, x[0] - h)) / (2.0 * h);
        assert!((fd - g.input[0]).abs() / fd.abs().max(1e-12) < 1e-6);
        let c0 = l.spline_coeffs()[6];
        let mut eval = |v: f64| {
            l.params_mut().0[6] = v;
            l.forward(&x).unwrap().0[0]
        };
        let fd = (eval(c0 + h) - eval(c0 - h)) / (2.0 * h);
        assert!((fd - g.coeffs[6]).abs() / fd.abs().max(1e-12) < 1e-6);
    }
}
