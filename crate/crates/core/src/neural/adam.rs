use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::params::Parametric;

/// Adaptive-moment optimizer with bias correction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Adam<S> {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub step: u64,
    m: Vec<S>,
    v: Vec<S>,
}

impl<S: Scalar> Adam<S> {
    pub fn new(num_params: usize, learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: vec![S::zero(); num_params],
            v: vec![S::zero(); num_params],
        }
    }

    pub fn for_model<M: Parametric<S>>(model: &M, learning_rate: f64) -> Self {
        Self::new(model.num_params(), learning_rate)
    }

    /// Descends along `grads` (gradients of a loss to minimize).
    pub fn apply(&mut self, params: &mut [S], grads: &[S]) -> Result<()> {
        if params.len() != self.m.len() {
            return Err(Error::Shape { expected: self.m.len(), got: params.len() });
        }
        if grads.len() != params.len() {
            return Err(Error::Shape { expected: params.len(), got: grads.len() });
        }
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (S::lit(self.beta1), S::lit(self.beta2));
        let c1 = S::one() - b1.powi(t);
        let c2 = S::one() - b2.powi(t);
        let lr = S::lit(self.learning_rate);
        let eps = S::lit(self.epsilon);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + (S::one() - b1) * g;
            self.v[i] = b2 * self.v[i] + (S::one() - b2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
        }
        Ok(())
    }

    pub fn step_model<M: Parametric<S>>(&mut self, model: &mut M, grads: &[S]) -> Result<()> {
        self.apply(model.params_mut(), grads)
    }
}
