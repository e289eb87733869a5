use serde::{Deserialize, Serialize};

use super::{Matrix, NumericError};

/// Adam hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 0.005,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Per-parameter moment estimates for bias-corrected Adam.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    config: AdamConfig,
    step: u64,
    first: Vec<Matrix>,
    second: Vec<Matrix>,
}

impl AdamState {
    pub fn new(config: AdamConfig, params: &[Matrix]) -> Self {
        let zeros = |m: &Matrix| Matrix::zeros(m.rows(), m.cols());
        Self {
            config,
            step: 0,
            first: params.iter().map(zeros).collect(),
            second: params.iter().map(zeros).collect(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn config(&self) -> &AdamConfig {
        &self.config
    }

    /// Applies one update in place: `p ← p − lr · m̂ / (√v̂ + ε)`.
    pub fn step(&mut self, params: &mut [Matrix], grads: &[Matrix]) -> Result<(), NumericError> {
        if params.len() != self.first.len() || grads.len() != params.len() {
            return Err(NumericError::ShapeMismatch {
                op: "adam_step",
                left: (params.len(), 0),
                right: (grads.len(), self.first.len()),
            });
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first) {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(NumericError::ShapeMismatch {
                    op: "adam_step",
                    left: p.shape(),
                    right: g.shape(),
                });
            }
        }
        self.step += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.step as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first)
            .zip(&mut self.second)
        {
            for (((pi, &gi), mi), vi) in p
                .as_mut_slice()
                .iter_mut()
                .zip(g.as_slice())
                .zip(m.as_mut_slice())
                .zip(v.as_mut_slice())
            {
                *mi = beta1 * *mi + (1.0 - beta1) * gi;
                *vi = beta2 * *vi + (1.0 - beta2) * gi * gi;
                let m_hat = *mi / c1;
                let v_hat = *vi / c2;
                *pi -= lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m̂ = v̂ = 1 after bias correction, so the step is lr / (1 + ε).
        let mut params = vec![Matrix::scalar(0.3)];
        let mut adam = AdamState::new(AdamConfig::default(), &params);
        adam.step(&mut params, &[Matrix::scalar(1.0)]).unwrap();
        let expected = 0.3 - 0.005 / (1.0 + 1e-8);
        assert!((params[0].item() - expected).abs() < 1e-15);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut params = vec![Matrix::from_rows(&[[1.0, -2.0]]).unwrap()];
        let before = params.clone();
        let mut adam = AdamState::new(AdamConfig::default(), &params);
        adam.step(&mut params, &[Matrix::zeros(1, 2)]).unwrap();
        assert_eq!(params, before);
    }

    #[test]
    fn identical_states_give_identical_updates() {
        let init = vec![Matrix::from_rows(&[[0.1, 0.2], [0.3, 0.4]]).unwrap()];
        let grads = [Matrix::from_rows(&[[0.5, -0.1], [2.0, 0.0]]).unwrap()];
        let run = || {
            let mut p = init.clone();
            let mut s = AdamState::new(AdamConfig::default(), &p);
            for _ in 0..3 {
                s.step(&mut p, &grads).unwrap();
            }
            p
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut params = vec![Matrix::zeros(2, 2)];
        let mut adam = AdamState::new(AdamConfig::default(), &params);
        assert!(adam.step(&mut params, &[Matrix::zeros(1, 2)]).is_err());
    }
}
