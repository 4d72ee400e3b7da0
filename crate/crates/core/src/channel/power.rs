//! Average-power normalization of complex symbol batches.

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Gain that brings the batch-mean symbol power `(1 / BL) Σ |x|²` to exactly one.
pub fn gain(x: &Tensor3) -> Result<f64> {
    let energy: f64 = x.data().iter().map(|v| v * v).sum();
    if energy == 0.0 {
        return Err(Error::ZeroSignal);
    }
    let symbols = (x.batch() * x.len()) as f64;
    Ok((symbols / energy).sqrt())
}

pub fn scale(x: &Tensor3, gain: f64) -> Tensor3 {
    let mut y = x.clone();
    y.data_mut().iter_mut().for_each(|v| *v *= gain);
    y
}

pub fn normalize(x: &Tensor3) -> Result<Tensor3> {
    Ok(scale(x, gain(x)?))
}

/// Gradient of [`normalize`] including the dependence of the gain on every input.
///
/// With `y = g x` and `g = sqrt(N / S)`: `dx = g (dy - x <x, dy> / S)`.
pub fn normalize_backward(x: &Tensor3, grad_y: &Tensor3) -> Result<Tensor3> {
    let g = gain(x)?;
    let energy: f64 = x.data().iter().map(|v| v * v).sum();
    let dot: f64 = x.data().iter().zip(grad_y.data()).map(|(a, b)| a * b).sum();
    let mut dx = grad_y.clone();
    for (d, &xv) in dx.data_mut().iter_mut().zip(x.data()) {
        *d = g * (*d - xv * dot / energy);
    }
    Ok(dx)
}

/// Batch-mean power per complex symbol.
pub fn mean_power(x: &Tensor3) -> f64 {
    x.data().iter().map(|v| v * v).sum::<f64>() / (x.batch() * x.len()) as f64
}
