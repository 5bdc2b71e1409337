//! Adam optimizer with bias correction.

use serde::{Deserialize, Serialize};

use super::layers::Scalar;
use super::model::{Grads, Model};
use crate::error::{Result, RimError};

/// Optimizer hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

impl AdamParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(RimError::config("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(RimError::config("Adam betas must lie in [0, 1)"));
        }
        if !(self.epsilon > 0.0) {
            return Err(RimError::config("Adam epsilon must be positive"));
        }
        Ok(())
    }
}

/// First/second moment estimates mirroring the model's flat parameter
/// slices, plus the step counter.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub params: AdamParams,
    step: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> Adam<T> {
    pub fn new(params: AdamParams) -> Self {
        Adam {
            params,
            step: 0,
            m: Vec::new(),
            v: Vec::new(),
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    /// One update over the model's parameters. Moment buffers are allocated
    /// lazily on the first step and must keep matching shapes afterwards.
    pub fn step(&mut self, model: &mut Model<T>, grads: &Grads<T>) -> Result<()> {
        self.params.validate()?;
        let mut params = model.param_slices_mut();
        let grad_slices = grads.grad_slices();
        if params.len() != grad_slices.len()
            || params
                .iter()
                .zip(grad_slices.iter())
                .any(|(p, g)| p.len() != g.len())
        {
            return Err(RimError::shape(
                "gradients matching model parameters",
                "mismatched slice layout",
            ));
        }
        if self.m.is_empty() {
            self.m = params.iter().map(|p| vec![T::zero(); p.len()]).collect();
            self.v = self.m.clone();
        } else if self.m.len() != params.len()
            || self
                .m
                .iter()
                .zip(params.iter())
                .any(|(m, p)| m.len() != p.len())
        {
            return Err(RimError::shape(
                "optimizer state matching model parameters",
                "mismatched moment layout",
            ));
        }

        self.step += 1;
        let t = self.step as i32;
        let b1 = T::from_f64(self.params.beta1);
        let b2 = T::from_f64(self.params.beta2);
        let one = T::one();
        let lr = T::from_f64(self.params.learning_rate);
        let eps = T::from_f64(self.params.epsilon);
        let corr1 = T::from_f64(1.0 - self.params.beta1.powi(t));
        let corr2 = T::from_f64(1.0 - self.params.beta2.powi(t));

        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grad_slices.iter())
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + (one - b1) * gi;
                v[i] = b2 * v[i] + (one - b2) * gi * gi;
                let m_hat = m[i] / corr1;
                let v_hat = v[i] / corr2;
                p[i] = p[i] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

/// Single-tensor Adam update used by the closed-form tests: returns the new
/// parameter value and advances `(m, v)` in place.
pub fn adam_update_scalar(
    params: &AdamParams,
    t: u64,
    theta: f64,
    grad: f64,
    m: &mut f64,
    v: &mut f64,
) -> f64 {
    *m = params.beta1 * *m + (1.0 - params.beta1) * grad;
    *v = params.beta2 * *v + (1.0 - params.beta2) * grad * grad;
    let m_hat = *m / (1.0 - params.beta1.powi(t as i32));
    let v_hat = *v / (1.0 - params.beta2.powi(t as i32));
    theta - params.learning_rate * m_hat / (v_hat.sqrt() + params.epsilon)
}
