use std::ops::Range;

use rand::distr::{Distribution, Uniform};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::layer::{self, LayerSpec};
use crate::channel::power;
use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// The non-trainable channel inserted between transmitter and receiver.
///
/// Implementations must be pure given the RNG: the backward pass depends only on the
/// upstream gradient, never on the noise drawn in the forward pass.
pub trait ChannelStage {
    fn forward(&self, x: &Tensor3, rng: &mut dyn RngCore) -> Result<Tensor3>;
    fn backward(&self, grad: &Tensor3) -> Result<Tensor3>;
    /// `true` when the forward pass draws no randomness.
    fn is_deterministic(&self) -> bool;
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamTensor {
    pub value: Vec<f64>,
    #[serde(skip)]
    pub grad: Vec<f64>,
    #[serde(skip)]
    pub(crate) m: Vec<f64>,
    #[serde(skip)]
    pub(crate) v: Vec<f64>,
}

impl ParamTensor {
    pub fn new(value: Vec<f64>) -> Self {
        let n = value.len();
        Self {
            value,
            grad: vec![0.0; n],
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerParams {
    pub weight: ParamTensor,
    pub bias: ParamTensor,
}

impl LayerParams {
    pub fn tensors(&self) -> [&ParamTensor; 2] {
        [&self.weight, &self.bias]
    }

    pub fn tensors_mut(&mut self) -> [&mut ParamTensor; 2] {
        [&mut self.weight, &mut self.bias]
    }
}

/// Weights, gradients and optimizer moments for every layer of a graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamStore {
    pub layers: Vec<Option<LayerParams>>,
    pub step: u64,
}

impl ParamStore {
    pub fn iter(&self) -> impl Iterator<Item = &ParamTensor> {
        self.layers.iter().flatten().flat_map(|p| p.tensors())
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut ParamTensor> {
        self.layers.iter_mut().flatten().flat_map(|p| p.tensors_mut())
    }

    pub fn count(&self) -> usize {
        self.iter().map(ParamTensor::len).sum()
    }

    pub fn zero_grad(&mut self) {
        for t in self.iter_mut() {
            t.grad.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    /// Restores gradient and moment buffers after deserialization.
    pub(crate) fn ensure_buffers(&mut self) {
        for t in self.iter_mut() {
            let n = t.value.len();
            for buf in [&mut t.grad, &mut t.m, &mut t.v] {
                if buf.len() != n {
                    *buf = vec![0.0; n];
                }
            }
        }
    }
}

/// Per-call options for a forward pass.
#[derive(Clone, Copy, Default)]
pub struct Pass<'a> {
    pub channel: Option<&'a dyn ChannelStage>,
    /// Use this power-normalization gain instead of the batch statistic.
    pub power_gain: Option<f64>,
}

impl<'a> Pass<'a> {
    pub fn with_channel(channel: &'a dyn ChannelStage) -> Self {
        Self {
            channel: Some(channel),
            power_gain: None,
        }
    }
}

/// Inputs recorded during a forward pass, consumed by [`ModelGraph::backward`].
pub struct Tape {
    inputs: Vec<Tensor3>,
    power_gain: Option<f64>,
    range: Range<usize>,
}

/// A sequential chain of layers with at most one channel slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelGraph {
    layers: Vec<LayerSpec>,
    pub params: ParamStore,
    channel_slot: Option<usize>,
}

impl ModelGraph {
    /// Builds a graph with Glorot-uniform weights and zero biases.
    ///
    /// `input_channels` and `train_len` are used to check that adjacent layers fit together.
    pub fn new<R: Rng + ?Sized>(
        layers: Vec<LayerSpec>,
        input_channels: usize,
        train_len: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut params = Vec::with_capacity(layers.len());
        for spec in &layers {
            let p = match (spec.param_shapes(), spec.fans()) {
                (Some((nw, nb)), Some((fan_in, fan_out))) => {
                    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
                    let w = (0..nw).map(|_| dist.sample(rng)).collect();
                    Some(LayerParams {
                        weight: ParamTensor::new(w),
                        bias: ParamTensor::new(vec![0.0; nb]),
                    })
                }
                _ => None,
            };
            params.push(p);
        }
        Self::from_parts(layers, ParamStore { layers: params, step: 0 }, input_channels, train_len)
    }

    pub fn from_parts(
        layers: Vec<LayerSpec>,
        mut params: ParamStore,
        input_channels: usize,
        train_len: usize,
    ) -> Result<Self> {
        let slots: Vec<usize> = layers
            .iter()
            .enumerate()
            .filter(|(_, l)| matches!(l, LayerSpec::ChannelSlot))
            .map(|(i, _)| i)
            .collect();
        if slots.len() > 1 {
            return Err(Error::InvalidModel("more than one channel slot".into()));
        }
        if params.layers.len() != layers.len() {
            return Err(Error::InvalidModel("parameter list does not match layer list".into()));
        }
        let (mut len, mut ch) = (train_len, input_channels);
        for (i, spec) in layers.iter().enumerate() {
            spec.validate()?;
            match (spec.param_shapes(), &params.layers[i]) {
                (None, None) => {}
                (Some((nw, nb)), Some(p)) if p.weight.len() == nw && p.bias.len() == nb => {}
                _ => {
                    return Err(Error::InvalidModel(format!(
                        "layer {i}: parameter shapes do not match {spec:?}"
                    )))
                }
            }
            (len, ch) = spec.output_shape(len, ch).ok_or_else(|| {
                Error::InvalidModel(format!(
                    "layer {i} ({spec:?}) cannot accept input of length {len} with {ch} channels"
                ))
            })?;
        }
        params.ensure_buffers();
        Ok(Self {
            layers,
            params,
            channel_slot: slots.first().copied(),
        })
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    pub fn channel_slot(&self) -> Option<usize> {
        self.channel_slot
    }

    pub fn param_count(&self) -> usize {
        self.params.count()
    }

    /// Layers before the channel slot (the whole graph when there is none).
    pub fn transmitter(&self) -> Range<usize> {
        0..self.channel_slot.unwrap_or(self.layers.len())
    }

    /// Layers after the channel slot (empty when there is none).
    pub fn receiver(&self) -> Range<usize> {
        self.channel_slot.map_or(self.layers.len()..self.layers.len(), |s| s + 1..self.layers.len())
    }

    fn apply(&self, i: usize, x: &Tensor3, pass: &Pass, rng: &mut dyn RngCore) -> Result<Tensor3> {
        let spec = &self.layers[i];
        let p = self.params.layers[i].as_ref();
        match spec {
            LayerSpec::Conv1d(_) | LayerSpec::PositionwiseDense { .. } => {
                let p = p.expect("validated");
                layer::conv1d_forward(i, &spec.conv().expect("conv"), &p.weight.value, &p.bias.value, x)
            }
            LayerSpec::LocallyConnected1d { conv, input_len } => {
                let p = p.expect("validated");
                layer::locally_connected_forward(i, conv, *input_len, &p.weight.value, &p.bias.value, x)
            }
            LayerSpec::Activation { function } => Ok(layer::activation_forward(*function, x)),
            LayerSpec::PowerNormalize => {
                check_complex(i, x)?;
                match pass.power_gain {
                    Some(g) => Ok(power::scale(x, g)),
                    None => power::normalize(x),
                }
            }
            LayerSpec::ChannelSlot => {
                check_complex(i, x)?;
                match pass.channel {
                    Some(ch) => ch.forward(x, rng),
                    None => Err(Error::InvalidArgument(format!(
                        "layer {i} is a channel slot but no channel was supplied"
                    ))),
                }
            }
        }
    }

    /// Runs layers in `range` without recording anything for backward.
    pub fn forward_range(
        &self,
        range: Range<usize>,
        x: &Tensor3,
        pass: &Pass,
        rng: &mut dyn RngCore,
    ) -> Result<Tensor3> {
        let mut h = x.clone();
        for i in range {
            h = self.apply(i, &h, pass, rng)?;
        }
        Ok(h)
    }

    pub fn forward(&self, x: &Tensor3, pass: &Pass, rng: &mut dyn RngCore) -> Result<Tensor3> {
        self.forward_range(0..self.layers.len(), x, pass, rng)
    }

    /// Forward pass over `range` recording the inputs each layer needs for backward.
    pub fn forward_train(
        &self,
        range: Range<usize>,
        x: &Tensor3,
        pass: &Pass,
        rng: &mut dyn RngCore,
    ) -> Result<(Tensor3, Tape)> {
        let mut inputs = Vec::with_capacity(range.len());
        let mut h = x.clone();
        for i in range.clone() {
            let next = self.apply(i, &h, pass, rng)?;
            inputs.push(std::mem::replace(&mut h, next));
        }
        Ok((
            h,
            Tape {
                inputs,
                power_gain: pass.power_gain,
                range,
            },
        ))
    }

    /// Back-propagates `grad` through the taped layers, accumulating parameter gradients.
    pub fn backward(&mut self, tape: &Tape, grad: &Tensor3, channel: Option<&dyn ChannelStage>) -> Result<Tensor3> {
        let mut g = grad.clone();
        for (slot, i) in tape.range.clone().enumerate().rev() {
            let x = &tape.inputs[slot];
            let spec = self.layers[i].clone();
            g = match &spec {
                LayerSpec::Conv1d(_) | LayerSpec::PositionwiseDense { .. } => {
                    let conv = spec.conv().expect("conv");
                    let p = self.params.layers[i].as_mut().expect("validated");
                    layer::conv1d_backward(&conv, &p.weight.value, x, &g, &mut p.weight.grad, &mut p.bias.grad)
                }
                LayerSpec::LocallyConnected1d { conv, .. } => {
                    let p = self.params.layers[i].as_mut().expect("validated");
                    layer::locally_connected_backward(conv, &p.weight.value, x, &g, &mut p.weight.grad, &mut p.bias.grad)
                }
                LayerSpec::Activation { function } => layer::activation_backward(*function, x, &g),
                LayerSpec::PowerNormalize => match tape.power_gain {
                    Some(gain) => power::scale(&g, gain),
                    None => power::normalize_backward(x, &g)?,
                },
                LayerSpec::ChannelSlot => match channel {
                    Some(ch) => ch.backward(&g)?,
                    None => {
                        return Err(Error::InvalidArgument(format!(
                            "layer {i} is a channel slot but no channel was supplied"
                        )))
                    }
                },
            };
        }
        Ok(g)
    }
}

fn check_complex(i: usize, x: &Tensor3) -> Result<()> {
    if x.channels() != 2 {
        return Err(Error::Shape {
            layer: i,
            expected: "(*, *, 2)".into(),
            got: x.shape_string(),
        });
    }
    Ok(())
}
