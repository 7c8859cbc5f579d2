use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::layers::c;
use crate::model::Gradients;
use crate::tensor::{NeuralError, Tensor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamaxConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamaxConfig {
    fn default() -> Self {
        AdamaxConfig { lr: 0.002, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// First moment and infinity-norm accumulator for every parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamaxState<F> {
    pub cfg: AdamaxConfig,
    pub t: u64,
    pub m: Vec<Vec<F>>,
    pub u: Vec<Vec<F>>,
}

impl<F: Float> AdamaxState<F> {
    pub fn new(params: &[Tensor<F>], cfg: AdamaxConfig) -> Self {
        let zeros = || params.iter().map(|p| vec![F::zero(); p.len()]).collect();
        AdamaxState { cfg, t: 0, m: zeros(), u: zeros() }
    }

    /// `m ← β1·m + (1−β1)·g`, `u ← max(β2·u, |g|)`,
    /// `θ ← θ − lr/(1−β1^t) · m/(u+ε)`.
    pub fn step(&mut self, params: &mut [Tensor<F>], grads: &Gradients<F>) -> Result<(), NeuralError> {
        if params.len() != self.m.len() || grads.tensors.len() != self.m.len() {
            return Err(NeuralError::Shape("optimizer state does not match parameters".into()));
        }
        self.t += 1;
        let (b1, b2, eps): (F, F, F) = (c(self.cfg.beta1), c(self.cfg.beta2), c(self.cfg.eps));
        let step: F = c(self.cfg.lr / (1.0 - self.cfg.beta1.powi(self.t as i32)));
        for (i, p) in params.iter_mut().enumerate() {
            let g = &grads.tensors[i];
            if g.len() != p.len() {
                return Err(NeuralError::Shape(format!("gradient {i} has {} values for {}", g.len(), p.len())));
            }
            let (m, u) = (&mut self.m[i], &mut self.u[i]);
            for (j, theta) in p.data_mut().iter_mut().enumerate() {
                m[j] = b1 * m[j] + (F::one() - b1) * g[j];
                u[j] = (b2 * u[j]).max(g[j].abs());
                *theta = *theta - step * m[j] / (u[j] + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grads(v: Vec<f64>) -> Gradients<f64> {
        Gradients { tensors: vec![v] }
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = vec![Tensor::new(vec![3], vec![0.5, -1.0, 2.0]).unwrap()];
        let mut s = AdamaxState::new(&p, AdamaxConfig::default());
        s.step(&mut p, &grads(vec![0.0; 3])).unwrap();
        assert_eq!(p[0].data(), [0.5, -1.0, 2.0]);
    }

    #[test]
    fn single_step_moves_by_learning_rate() {
        let mut p = vec![Tensor::new(vec![1], vec![0.0]).unwrap()];
        let mut s = AdamaxState::new(&p, AdamaxConfig::default());
        s.step(&mut p, &grads(vec![1.0])).unwrap();
        // m = 0.1, u = 1, bias correction 1/(1-0.9): lr up to the ε guard.
        assert!((p[0].data()[0] + 0.002).abs() < 1e-10, "{}", p[0].data()[0]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn infinity_norm_is_monotone_for_equal_gradients() {
        let mut p = vec![Tensor::new(vec![1], vec![0.0]).unwrap()];
        let mut s = AdamaxState::new(&p, AdamaxConfig::default());
        let mut last = 0.0;
        for _ in 0..50 {
            s.step(&mut p, &grads(vec![-0.3])).unwrap();
            assert!(s.u[0][0] >= last && s.u[0][0] >= 0.0);
            last = s.u[0][0];
        }
    }
}
