use super::{next_layer_id, ModelError};

/// Affine layer `y = W x + b`, `W` row-major `[out_dim][in_dim]`.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub in_dim: usize,
    pub out_dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    id: u64,
    version: u64,
}

#[derive(Debug, Clone)]
pub struct DenseTape {
    layer_id: u64,
    version: u64,
    input: Vec<f64>,
}

impl DenseLayer {
    pub fn new(in_dim: usize, out_dim: usize) -> Self {
        DenseLayer {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
            id: next_layer_id(),
            version: 0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    /// Mutable `(weights, bias)`. Invalidates earlier tapes.
    pub fn params_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        self.version += 1;
        (&mut self.weights, &mut self.bias)
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, DenseTape), ModelError> {
        if x.len() != self.in_dim {
            return Err(ModelError::Shape {
                what: "dense input",
                expected: self.in_dim,
                found: x.len(),
            });
        }
        let y = (0..self.out_dim)
            .map(|o| {
                let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
                self.bias[o] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            })
            .collect();
        Ok((
            y,
            DenseTape {
                layer_id: self.id,
                version: self.version,
                input: x.to_vec(),
            },
        ))
    }

    pub fn backward_into(
        &self,
        tape: &DenseTape,
        upstream: &[f64],
        weight_grad: &mut [f64],
        bias_grad: &mut [f64],
    ) -> Result<Vec<f64>, ModelError> {
        if tape.layer_id != self.id || tape.version != self.version {
            return Err(ModelError::StaleTape);
        }
        if upstream.len() != self.out_dim {
            return Err(ModelError::Shape {
                what: "dense upstream gradient",
                expected: self.out_dim,
                found: upstream.len(),
            });
        }
        let mut input = vec![0.0; self.in_dim];
        for (o, &u) in upstream.iter().enumerate() {
            bias_grad[o] += u;
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let grow = &mut weight_grad[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grow[i] += u * tape.input[i];
                input[i] += u * row[i];
            }
        }
        Ok(input)
    }
}
