//! Mean-squared-error loss over batched tensors.

use ndarray::Array4;

use super::layers::Scalar;
use crate::error::{Result, RimError};

/// MSE over all elements, plus its gradient `2 (pred - target) / count`.
pub fn mse_loss<T: Scalar>(pred: &Array4<T>, target: &Array4<T>) -> Result<(f64, Array4<T>)> {
    if pred.dim() != target.dim() {
        return Err(RimError::shape(
            format!("{:?}", target.dim()),
            format!("{:?}", pred.dim()),
        ));
    }
    let count = pred.len() as f64;
    let mut loss = 0.0f64;
    let mut grad = Array4::<T>::zeros(pred.dim());
    for ((g, &p), &t) in grad.iter_mut().zip(pred.iter()).zip(target.iter()) {
        let d = p - t;
        loss += d.to_f64() * d.to_f64();
        *g = (d + d) / T::from_f64(count);
    }
    Ok((loss / count, grad))
}
