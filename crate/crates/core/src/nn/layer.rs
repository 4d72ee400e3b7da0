//! Layer specifications and the per-layer forward/backward kernels.
//!
//! Weight layouts (row-major):
//! - `Conv1d` / `PositionwiseDense`: `[kernel][in][out]`, bias `[out]`.
//! - `LocallyConnected1d`: `[position][kernel][in][out]`, bias `[position][out]`.
//!
//! All convolutions are cross-correlations over a symmetrically zero-padded input.

use serde::{Deserialize, Serialize};

use super::gemm::{gemm, View};
use crate::error::{Error, Result};
use crate::tensor::Tensor3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel: usize,
    pub stride: usize,
    pub pad: usize,
}

impl ConvSpec {
    pub fn new(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, pad: usize) -> Self {
        Self {
            in_channels,
            out_channels,
            kernel,
            stride,
            pad,
        }
    }

    /// Stride-1 layer with `pad = kernel / 2`; keeps the length for odd kernels.
    pub fn same(in_channels: usize, out_channels: usize, kernel: usize) -> Self {
        Self::new(in_channels, out_channels, kernel, 1, kernel / 2)
    }

    /// `floor((len + 2 pad - kernel) / stride) + 1`, or `None` when the window does not fit.
    pub fn output_len(&self, len: usize) -> Option<usize> {
        let padded = len + 2 * self.pad;
        if padded < self.kernel {
            return None;
        }
        Some((padded - self.kernel) / self.stride + 1)
    }

    fn receptive(&self) -> usize {
        self.kernel * self.in_channels
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activation {
    Relu,
    Sigmoid,
    Linear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LayerSpec {
    Conv1d(ConvSpec),
    LocallyConnected1d { conv: ConvSpec, input_len: usize },
    PositionwiseDense { in_channels: usize, out_channels: usize },
    Activation { function: Activation },
    PowerNormalize,
    ChannelSlot,
}

impl LayerSpec {
    pub fn dense(in_channels: usize, out_channels: usize) -> Self {
        LayerSpec::PositionwiseDense {
            in_channels,
            out_channels,
        }
    }

    pub fn act(function: Activation) -> Self {
        LayerSpec::Activation { function }
    }

    /// Convolution geometry of the layers that carry weights.
    pub fn conv(&self) -> Option<ConvSpec> {
        match *self {
            LayerSpec::Conv1d(c) => Some(c),
            LayerSpec::LocallyConnected1d { conv, .. } => Some(conv),
            LayerSpec::PositionwiseDense {
                in_channels,
                out_channels,
            } => Some(ConvSpec::new(in_channels, out_channels, 1, 1, 0)),
            _ => None,
        }
    }

    /// `(weight_len, bias_len)` for trainable layers.
    pub fn param_shapes(&self) -> Option<(usize, usize)> {
        let conv = self.conv()?;
        let per_pos = (conv.receptive() * conv.out_channels, conv.out_channels);
        match *self {
            LayerSpec::LocallyConnected1d { input_len, .. } => {
                let positions = conv.output_len(input_len)?;
                Some((per_pos.0 * positions, per_pos.1 * positions))
            }
            _ => Some(per_pos),
        }
    }

    /// Glorot fan sizes for weight initialization.
    pub fn fans(&self) -> Option<(usize, usize)> {
        let conv = self.conv()?;
        Some((conv.receptive(), conv.kernel * conv.out_channels))
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(c) = self.conv() {
            if c.kernel == 0 || c.stride == 0 || c.in_channels == 0 || c.out_channels == 0 {
                return Err(Error::InvalidModel(format!(
                    "kernel, stride and channel counts must be >= 1 in {self:?}"
                )));
            }
        }
        if let LayerSpec::LocallyConnected1d { conv, input_len } = self {
            if conv.output_len(*input_len).is_none() {
                return Err(Error::InvalidModel(format!(
                    "locally connected layer has no output positions for length {input_len}"
                )));
            }
        }
        Ok(())
    }

    /// Output `(length, channels)` for an input of `(len, channels)`; `None` if incompatible.
    pub fn output_shape(&self, len: usize, channels: usize) -> Option<(usize, usize)> {
        match self {
            LayerSpec::Conv1d(_) | LayerSpec::PositionwiseDense { .. } => {
                let c = self.conv()?;
                (channels == c.in_channels).then_some(())?;
                Some((c.output_len(len)?, c.out_channels))
            }
            LayerSpec::LocallyConnected1d { conv, input_len } => {
                (channels == conv.in_channels && len == *input_len).then_some(())?;
                Some((conv.output_len(len)?, conv.out_channels))
            }
            LayerSpec::Activation { .. } => Some((len, channels)),
            LayerSpec::PowerNormalize | LayerSpec::ChannelSlot => {
                (channels == 2).then_some((len, channels))
            }
        }
    }
}

fn check_input(index: usize, spec: &ConvSpec, x: &Tensor3, fixed_len: Option<usize>) -> Result<usize> {
    let expected = || match fixed_len {
        Some(l) => format!("(*, {l}, {})", spec.in_channels),
        None => format!("(*, *, {})", spec.in_channels),
    };
    let mismatch = || Error::Shape {
        layer: index,
        expected: expected(),
        got: x.shape_string(),
    };
    if x.channels() != spec.in_channels {
        return Err(mismatch());
    }
    if fixed_len.is_some_and(|l| l != x.len()) {
        return Err(mismatch());
    }
    spec.output_len(x.len()).ok_or_else(mismatch)
}

/// Zero-padded copy of one batch item: `(len + 2 pad) * in` values.
fn padded_item(x: &Tensor3, b: usize, pad: usize, out: &mut Vec<f64>) {
    let c = x.channels();
    out.clear();
    out.resize((x.len() + 2 * pad) * c, 0.0);
    out[pad * c..(pad + x.len()) * c].copy_from_slice(x.item(b));
}

/// Shared-weight 1-D convolution forward pass.
pub fn conv1d_forward(index: usize, spec: &ConvSpec, weight: &[f64], bias: &[f64], x: &Tensor3) -> Result<Tensor3> {
    let out_len = check_input(index, spec, x, None)?;
    let (cin, cout) = (spec.in_channels, spec.out_channels);
    let k = spec.receptive();
    let mut y = Tensor3::zeros(x.batch(), out_len, cout);
    let mut xp = Vec::new();
    for b in 0..x.batch() {
        let yb = y.item_mut(b);
        for row in yb.chunks_exact_mut(cout) {
            row.copy_from_slice(bias);
        }
        padded_item(x, b, spec.pad, &mut xp);
        // Windows overlap in the padded buffer; a row stride of `stride * in` walks them in place.
        gemm(
            out_len,
            k,
            cout,
            &xp,
            View {
                offset: 0,
                rs: spec.stride * cin,
                cs: 1,
            },
            weight,
            View::row_major(0, cout),
            1.0,
            yb,
            View::row_major(0, cout),
        );
    }
    Ok(y)
}

/// Backward pass of [`conv1d_forward`]: accumulates into `grad_w`/`grad_b`, returns the input gradient.
pub fn conv1d_backward(
    spec: &ConvSpec,
    weight: &[f64],
    x: &Tensor3,
    grad_y: &Tensor3,
    grad_w: &mut [f64],
    grad_b: &mut [f64],
) -> Tensor3 {
    let (cin, cout) = (spec.in_channels, spec.out_channels);
    let k = spec.receptive();
    let out_len = grad_y.len();
    let mut grad_x = Tensor3::zeros(x.batch(), x.len(), cin);
    let mut xp = Vec::new();
    let mut gxp = Vec::new();
    let row = spec.stride * cin;
    for b in 0..x.batch() {
        let gy = grad_y.item(b);
        for r in gy.chunks_exact(cout) {
            for (gb, g) in grad_b.iter_mut().zip(r) {
                *gb += g;
            }
        }
        padded_item(x, b, spec.pad, &mut xp);
        // dW += Xwinᵀ · dY
        gemm(
            k,
            out_len,
            cout,
            &xp,
            View {
                offset: 0,
                rs: 1,
                cs: row,
            },
            gy,
            View::row_major(0, cout),
            1.0,
            grad_w,
            View::row_major(0, cout),
        );
        gxp.clear();
        gxp.resize(xp.len(), 0.0);
        // dXpad[o*s + t] += dY[o] · W[t]ᵀ, one tap at a time so no two rows of C alias.
        for t in 0..spec.kernel {
            gemm(
                out_len,
                cout,
                cin,
                gy,
                View::row_major(0, cout),
                weight,
                View::row_major(t * cin * cout, cout).t(),
                1.0,
                &mut gxp,
                View {
                    offset: t * cin,
                    rs: row,
                    cs: 1,
                },
            );
        }
        grad_x
            .item_mut(b)
            .copy_from_slice(&gxp[spec.pad * cin..(spec.pad + x.len()) * cin]);
    }
    grad_x
}

/// Locally connected (unshared-weight) forward pass on an input of exactly `input_len`.
pub fn locally_connected_forward(
    index: usize,
    spec: &ConvSpec,
    input_len: usize,
    weight: &[f64],
    bias: &[f64],
    x: &Tensor3,
) -> Result<Tensor3> {
    let out_len = check_input(index, spec, x, Some(input_len))?;
    let (cin, cout) = (spec.in_channels, spec.out_channels);
    let k = spec.receptive();
    let batch = x.batch();
    let padded_len = (x.len() + 2 * spec.pad) * cin;
    let xp = padded_batch(x, spec.pad);
    let mut y = Tensor3::zeros(batch, out_len, cout);
    let yd = y.data_mut();
    for b in 0..batch {
        yd[b * out_len * cout..(b + 1) * out_len * cout].copy_from_slice(bias);
    }
    for o in 0..out_len {
        gemm(
            batch,
            k,
            cout,
            &xp,
            View {
                offset: o * spec.stride * cin,
                rs: padded_len,
                cs: 1,
            },
            weight,
            View::row_major(o * k * cout, cout),
            1.0,
            yd,
            View {
                offset: o * cout,
                rs: out_len * cout,
                cs: 1,
            },
        );
    }
    Ok(y)
}

pub fn locally_connected_backward(
    spec: &ConvSpec,
    weight: &[f64],
    x: &Tensor3,
    grad_y: &Tensor3,
    grad_w: &mut [f64],
    grad_b: &mut [f64],
) -> Tensor3 {
    let (cin, cout) = (spec.in_channels, spec.out_channels);
    let k = spec.receptive();
    let batch = x.batch();
    let out_len = grad_y.len();
    let padded_len = (x.len() + 2 * spec.pad) * cin;
    let xp = padded_batch(x, spec.pad);
    let mut gxp = vec![0.0; xp.len()];
    let gy = grad_y.data();
    for b in 0..batch {
        let item = &gy[b * out_len * cout..(b + 1) * out_len * cout];
        for (gb, g) in grad_b.iter_mut().zip(item) {
            *gb += g;
        }
    }
    let gy_view = |o: usize| View {
        offset: o * cout,
        rs: out_len * cout,
        cs: 1,
    };
    for o in 0..out_len {
        let xv = View {
            offset: o * spec.stride * cin,
            rs: padded_len,
            cs: 1,
        };
        gemm(
            k,
            batch,
            cout,
            &xp,
            xv.t(),
            gy,
            gy_view(o),
            1.0,
            grad_w,
            View::row_major(o * k * cout, cout),
        );
        gemm(
            batch,
            cout,
            k,
            gy,
            gy_view(o),
            weight,
            View::row_major(o * k * cout, cout).t(),
            1.0,
            &mut gxp,
            xv,
        );
    }
    let mut grad_x = Tensor3::zeros(batch, x.len(), cin);
    for b in 0..batch {
        let start = b * padded_len + spec.pad * cin;
        grad_x
            .item_mut(b)
            .copy_from_slice(&gxp[start..start + x.len() * cin]);
    }
    grad_x
}

fn padded_batch(x: &Tensor3, pad: usize) -> Vec<f64> {
    let c = x.channels();
    let padded_len = (x.len() + 2 * pad) * c;
    let mut xp = vec![0.0; x.batch() * padded_len];
    for b in 0..x.batch() {
        let start = b * padded_len + pad * c;
        xp[start..start + x.len() * c].copy_from_slice(x.item(b));
    }
    xp
}

#[inline]
fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

pub fn activation_forward(function: Activation, x: &Tensor3) -> Tensor3 {
    let mut y = x.clone();
    match function {
        Activation::Relu => y.data_mut().iter_mut().for_each(|v| *v = v.max(0.0)),
        Activation::Sigmoid => y.data_mut().iter_mut().for_each(|v| *v = sigmoid(*v)),
        Activation::Linear => {}
    }
    y
}

/// Upstream gradient times the elementwise derivative at `x` (ReLU'(0) = 0).
pub fn activation_backward(function: Activation, x: &Tensor3, grad_y: &Tensor3) -> Tensor3 {
    let mut g = grad_y.clone();
    let xs = x.data();
    match function {
        Activation::Relu => {
            for (gv, &xv) in g.data_mut().iter_mut().zip(xs) {
                if xv <= 0.0 {
                    *gv = 0.0;
                }
            }
        }
        Activation::Sigmoid => {
            for (gv, &xv) in g.data_mut().iter_mut().zip(xs) {
                let s = sigmoid(xv);
                *gv *= s * (1.0 - s);
            }
        }
        Activation::Linear => {}
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(len: usize, ch: usize, v: &[f64]) -> Tensor3 {
        Tensor3::from_vec(1, len, ch, v.to_vec()).unwrap()
    }

    #[test]
    fn identity_kernel_passes_input_through() {
        let spec = ConvSpec::new(1, 1, 1, 1, 0);
        let y = conv1d_forward(0, &spec, &[1.0], &[0.0], &t(3, 1, &[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(y.data(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn strided_pair_sum() {
        let spec = ConvSpec::new(1, 1, 2, 2, 0);
        let y = conv1d_forward(0, &spec, &[1.0, 1.0], &[0.0], &t(4, 1, &[1.0, 2.0, 3.0, 4.0])).unwrap();
        assert_eq!(y.data(), &[3.0, 7.0]);
    }

    #[test]
    fn output_length_formula() {
        for len in 1..20 {
            for kernel in 1..6 {
                for stride in 1..4 {
                    for pad in 0..3 {
                        let spec = ConvSpec::new(1, 1, kernel, stride, pad);
                        let expected = if len + 2 * pad >= kernel {
                            Some((len + 2 * pad - kernel) / stride + 1)
                        } else {
                            None
                        };
                        assert_eq!(spec.output_len(len), expected);
                        if let Some(out) = expected {
                            let x = Tensor3::zeros(2, len, 1);
                            let w = vec![0.5; kernel];
                            let y = conv1d_forward(0, &spec, &w, &[0.0], &x).unwrap();
                            assert_eq!(y.len(), out);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn shape_error_names_layer_and_shapes() {
        let spec = ConvSpec::new(2, 1, 1, 1, 0);
        let err = conv1d_forward(7, &spec, &[1.0, 1.0], &[0.0], &t(3, 1, &[1.0, 2.0, 3.0])).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("layer 7"), "{msg}");
        assert!(msg.contains("(1, 3, 1)") && msg.contains("(*, *, 2)"), "{msg}");
    }

    #[test]
    fn locally_connected_position_kernels() {
        let spec = ConvSpec::new(1, 1, 1, 1, 0);
        let x = t(2, 1, &[3.0, 5.0]);
        let y = locally_connected_forward(0, &spec, 2, &[1.0, 1.0], &[0.0, 0.0], &x).unwrap();
        assert_eq!(y.data(), &[3.0, 5.0]);
        let y = locally_connected_forward(0, &spec, 2, &[1.0, 2.0], &[0.0, 0.0], &x).unwrap();
        assert_eq!(y.data(), &[3.0, 10.0]);
    }

    #[test]
    fn locally_connected_rejects_other_lengths() {
        let spec = ConvSpec::new(1, 1, 1, 1, 0);
        let x = t(3, 1, &[1.0, 2.0, 3.0]);
        assert!(matches!(
            locally_connected_forward(4, &spec, 2, &[1.0, 1.0], &[0.0, 0.0], &x),
            Err(Error::Shape { layer: 4, .. })
        ));
    }

    #[test]
    fn activations() {
        let x = t(3, 1, &[-1.0, 0.0, 2.0]);
        assert_eq!(activation_forward(Activation::Relu, &x).data(), &[0.0, 0.0, 2.0]);
        let z = t(1, 1, &[0.0]);
        assert_eq!(activation_forward(Activation::Sigmoid, &z).data(), &[0.5]);
        let g = activation_backward(Activation::Sigmoid, &z, &t(1, 1, &[1.0]));
        assert_eq!(g.data(), &[0.25]);
        let g = activation_backward(Activation::Relu, &x, &t(3, 1, &[1.0, 1.0, 1.0]));
        assert_eq!(g.data(), &[0.0, 0.0, 1.0]);
    }
}
