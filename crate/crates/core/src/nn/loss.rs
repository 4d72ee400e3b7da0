use crate::error::{invalid, Result};
use crate::tensor::Tensor3;

pub const PROB_CLAMP: f64 = 1e-12;

/// Mean binary cross-entropy and its gradient with respect to `pred`.
///
/// Predictions are clamped to `[1e-12, 1 - 1e-12]` before the logarithm.
pub fn bce_loss(pred: &Tensor3, target: &Tensor3) -> Result<(f64, Tensor3)> {
    if pred.shape() != target.shape() {
        return invalid(format!(
            "prediction shape {} does not match target shape {}",
            pred.shape_string(),
            target.shape_string()
        ));
    }
    let n = pred.data().len() as f64;
    let mut grad = Tensor3::zeros(pred.batch(), pred.len(), pred.channels());
    let mut total = 0.0;
    for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
        total -= t * p.ln() + (1.0 - t) * (1.0 - p).ln();
        *g = (p - t) / (p * (1.0 - p)) / n;
    }
    Ok((total / n, grad))
}

/// `0.5 * mean((pred - target)^2)`, used for checking graphs without a sigmoid head.
pub fn squared_error(pred: &Tensor3, target: &Tensor3) -> Result<(f64, Tensor3)> {
    if pred.shape() != target.shape() {
        return invalid("prediction and target shapes differ");
    }
    let n = pred.data().len() as f64;
    let mut grad = Tensor3::zeros(pred.batch(), pred.len(), pred.channels());
    let mut total = 0.0;
    for ((g, &p), &t) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()) {
        total += 0.5 * (p - t) * (p - t);
        *g = (p - t) / n;
    }
    Ok((total / n, grad))
}
