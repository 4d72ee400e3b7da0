//! Central-difference gradient checking for whole graphs.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::graph::{ChannelStage, ModelGraph, Pass};
use super::loss::{bce_loss, squared_error};
use crate::error::{Error, Result};
use crate::tensor::Tensor3;

pub const FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Mean binary cross-entropy; for graphs ending in a sigmoid.
    Bce,
    /// Half mean squared error.
    SquaredError,
}

impl Objective {
    fn eval(self, pred: &Tensor3, target: &Tensor3) -> Result<(f64, Tensor3)> {
        match self {
            Objective::Bce => bce_loss(pred, target),
            Objective::SquaredError => squared_error(pred, target),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Max relative error over all weights and biases.
    pub params: f64,
    /// Max relative error over the input tensor.
    pub inputs: f64,
}

impl GradCheckReport {
    pub fn max(&self) -> f64 {
        self.params.max(self.inputs)
    }
}

fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / (numeric.abs() + 1e-8)
}

fn loss_at(graph: &ModelGraph, x: &Tensor3, target: &Tensor3, objective: Objective, channel: Option<&dyn ChannelStage>) -> Result<f64> {
    // Deterministic graphs never touch the RNG; a fixed one keeps the signature honest.
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let pass = Pass { channel, power_gain: None };
    let y = graph.forward(x, &pass, &mut rng)?;
    Ok(objective.eval(&y, target)?.0)
}

/// Compares back-propagated gradients against central differences with step `1e-5`.
pub fn finite_difference_check(
    graph: &ModelGraph,
    x: &Tensor3,
    target: &Tensor3,
    objective: Objective,
    channel: Option<&dyn ChannelStage>,
) -> Result<GradCheckReport> {
    finite_difference_check_with(graph, x, target, objective, channel, |_| {})
}

/// As [`finite_difference_check`], with `tamper` applied to the analytic gradients first.
pub fn finite_difference_check_with(
    graph: &ModelGraph,
    x: &Tensor3,
    target: &Tensor3,
    objective: Objective,
    channel: Option<&dyn ChannelStage>,
    tamper: impl FnOnce(&mut ModelGraph),
) -> Result<GradCheckReport> {
    if graph.channel_slot().is_some() {
        match channel {
            Some(ch) if ch.is_deterministic() => {}
            Some(_) => {
                return Err(Error::InvalidArgument(
                    "gradient check needs a deterministic (noise-free) channel".into(),
                ))
            }
            None => return Err(Error::InvalidArgument("graph has a channel slot but no channel was given".into())),
        }
    }

    let mut g = graph.clone();
    g.params.zero_grad();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let pass = Pass { channel, power_gain: None };
    let (y, tape) = g.forward_train(0..g.layers().len(), x, &pass, &mut rng)?;
    let (_, dy) = objective.eval(&y, target)?;
    let dx = g.backward(&tape, &dy, channel)?;
    tamper(&mut g);

    let analytic: Vec<Vec<f64>> = g.params.iter().map(|t| t.grad.clone()).collect();
    let mut worst_param = 0.0f64;
    for (ti, grads) in analytic.iter().enumerate() {
        for (j, &a) in grads.iter().enumerate() {
            let original = g.params.iter().nth(ti).expect("tensor").value[j];
            let probe = |delta: f64, g: &mut ModelGraph| -> Result<f64> {
                g.params.iter_mut().nth(ti).expect("tensor").value[j] = original + delta;
                loss_at(g, x, target, objective, channel)
            };
            let up = probe(FD_STEP, &mut g)?;
            let down = probe(-FD_STEP, &mut g)?;
            g.params.iter_mut().nth(ti).expect("tensor").value[j] = original;
            worst_param = worst_param.max(rel_err(a, (up - down) / (2.0 * FD_STEP)));
        }
    }

    let mut worst_input = 0.0f64;
    let mut xp = x.clone();
    for j in 0..x.data().len() {
        let original = x.data()[j];
        xp.data_mut()[j] = original + FD_STEP;
        let up = loss_at(&g, &xp, target, objective, channel)?;
        xp.data_mut()[j] = original - FD_STEP;
        let down = loss_at(&g, &xp, target, objective, channel)?;
        xp.data_mut()[j] = original;
        worst_input = worst_input.max(rel_err(dx.data()[j], (up - down) / (2.0 * FD_STEP)));
    }

    Ok(GradCheckReport {
        params: worst_param,
        inputs: worst_input,
    })
}
