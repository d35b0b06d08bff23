use crate::model::Gradients;

use super::TrainError;

/// Bias-corrected Adam moments for every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub step: u64,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl OptimizerState {
    pub fn new(shapes: &[usize], lr: f64) -> Self {
        OptimizerState {
            step: 0,
            first_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: shapes.iter().map(|&n| vec![0.0; n]).collect(),
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam update. `names` label tensors in the non-finite diagnostic.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &Gradients,
    state: &mut OptimizerState,
    names: &[String],
) -> Result<(), TrainError> {
    if params.len() != grads.tensors.len() || params.len() != state.first_moment.len() {
        return Err(TrainError::Shape(format!(
            "{} parameter tensors, {} gradient tensors, {} moment tensors",
            params.len(),
            grads.tensors.len(),
            state.first_moment.len()
        )));
    }
    for (t, (p, g)) in params.iter().zip(&grads.tensors).enumerate() {
        if p.len() != g.len() || p.len() != state.first_moment[t].len() {
            return Err(TrainError::Shape(format!("tensor {t}: {} params, {} grads", p.len(), g.len())));
        }
    }
    if let Some(t) = grads.first_non_finite() {
        return Err(TrainError::NonFinite {
            instance: None,
            tensor: names.get(t).cloned().unwrap_or_else(|| format!("tensor{t}")),
        });
    }
    state.step += 1;
    let b1t = 1.0 - state.beta1.powi(state.step as i32);
    let b2t = 1.0 - state.beta2.powi(state.step as i32);
    for (t, p) in params.iter_mut().enumerate() {
        let g = &grads.tensors[t];
        let m = &mut state.first_moment[t];
        let v = &mut state.second_moment[t];
        for k in 0..p.len() {
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
            let mh = m[k] / b1t;
            let vh = v[k] / b2t;
            p[k] -= state.lr * mh / (vh.sqrt() + state.eps);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_no_move() {
        let mut p = vec![0.5, -1.0];
        let mut st = OptimizerState::new(&[2], 1e-3);
        let g = Gradients { tensors: vec![vec![0.0, 0.0]] };
        adam_step(&mut [&mut p[..]], &g, &mut st, &[]).unwrap();
        assert_eq!(p, vec![0.5, -1.0]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_is_lr() {
        let mut p = [0.0];
        let mut st = OptimizerState::new(&[1], 0.1);
        let g = Gradients { tensors: vec![vec![1.0]] };
        adam_step(&mut [&mut p[..]], &g, &mut st, &[]).unwrap();
        // m_hat = v_hat = 1 at t = 1
        assert!((p[0] + 0.1 / (1.0 + 1e-8)).abs() < 1e-15);
    }

    #[test]
    fn non_finite_names_tensor() {
        let mut a = vec![0.0];
        let mut b = [0.0];
        let mut st = OptimizerState::new(&[1, 1], 0.1);
        let g = Gradients {
            tensors: vec![vec![1.0], vec![f64::NAN]],
        };
        let names = vec!["a".to_string(), "b".to_string()];
        match adam_step(&mut [&mut a[..], &mut b[..]], &g, &mut st, &names) {
            Err(TrainError::NonFinite { tensor, .. }) => assert_eq!(tensor, "b"),
            other => panic!("{other:?}"),
        }
        assert_eq!(a, vec![0.0]);
    }
}
