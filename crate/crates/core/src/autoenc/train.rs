use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::checkpoint::Checkpoint;
use super::data::{gen_dataset, stream_rng, Stream};
use super::{ArchConfig, TrainConfig};
use crate::channel::{ChannelSpec, Domain};
use crate::error::{invalid, Error, Result};
use crate::nn::{bce_loss, Adam, ModelGraph, Pass};
use crate::tensor::Tensor3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    /// Validation loss of the freshly initialized model.
    pub initial_val_loss: f64,
    /// Epoch whose weights were kept.
    pub best_epoch: usize,
    pub stopped_early: bool,
}

/// Rows `start..start + count` of a batch-major tensor.
pub(crate) fn rows(t: &Tensor3, start: usize, count: usize) -> Tensor3 {
    let per = t.len() * t.channels();
    Tensor3::from_vec(count, t.len(), t.channels(), t.data()[start * per..(start + count) * per].to_vec())
        .expect("row range checked by caller")
}

/// Bit targets `(B, k·M, 1)` viewed as the receiver's `(B, M, k)` output layout.
fn as_output(bits: &Tensor3, k: usize) -> Result<Tensor3> {
    bits.clone().reshape(bits.batch(), bits.len() / k, k)
}

pub(crate) fn check_channel(arch: &ArchConfig, channel: &ChannelSpec) -> Result<()> {
    if channel.domain() != arch.domain {
        return Err(Error::DomainMismatch(format!(
            "architecture is {:?}-domain but channel is {:?}-domain",
            arch.domain,
            channel.domain()
        )));
    }
    if let (Domain::Frequency, Some(g)) = (arch.domain, channel.gains()) {
        if g.len() != arch.m {
            return invalid(format!("channel has {} subcarrier gains, model expects M = {}", g.len(), arch.m));
        }
    }
    Ok(())
}

/// Mean BCE over `data`, with noise drawn from the validation noise stream of `seed`.
pub fn evaluate_loss(graph: &ModelGraph, k: usize, data: &Tensor3, channel: &ChannelSpec, seed: u64, batch: usize) -> Result<f64> {
    let mut rng = stream_rng(seed, Stream::ValidationNoise);
    let pass = Pass::with_channel(channel);
    let mut total = 0.0;
    let mut start = 0;
    while start < data.batch() {
        let count = batch.min(data.batch() - start);
        let x = rows(data, start, count);
        let y = graph.forward(&x, &pass, &mut rng)?;
        total += bce_loss(&y, &as_output(&x, k)?)?.0 * count as f64;
        start += count;
    }
    Ok(total / data.batch() as f64)
}

/// Trains `graph` with Adam on binary cross-entropy.
///
/// The channel's noise model is used at `cfg.snr_db`. Noise is the only quantity resampled
/// per batch; training data order is fixed. `log` receives each epoch and its wall time.
/// The weights with the lowest validation loss are returned.
pub fn train(
    mut graph: ModelGraph,
    arch: &ArchConfig,
    channel: &ChannelSpec,
    cfg: &TrainConfig,
    log: &mut dyn FnMut(&EpochRecord, f64),
) -> Result<TrainOutcome> {
    arch.validate()?;
    cfg.validate()?;
    check_channel(arch, channel)?;
    let k = arch.k;
    let chan = channel.with_snr(cfg.snr_db);
    let train_data = gen_dataset(cfg.n_train, k, arch.m, cfg.seed, Stream::Train);
    let val_data = gen_dataset(cfg.n_test, k, arch.m, cfg.seed, Stream::Validation);
    let mut noise_rng = stream_rng(cfg.seed, Stream::TrainNoise);
    let adam = Adam::new(cfg.lr);
    let pass = Pass::with_channel(&chan);
    let all = 0..graph.layers().len();

    let initial_val_loss = evaluate_loss(&graph, k, &val_data, &chan, cfg.seed, cfg.batch)?;
    let mut best = (initial_val_loss, 0, graph.params.clone());
    let mut history = Vec::new();
    let mut stale = 0;
    let mut stopped_early = false;

    for epoch in 1..=cfg.epochs {
        let clock = Instant::now();
        let mut sum = 0.0;
        let mut start = 0;
        let mut batch_index = 0;
        while start < cfg.n_train {
            let count = cfg.batch.min(cfg.n_train - start);
            let x = rows(&train_data, start, count);
            let (y, tape) = graph.forward_train(all.clone(), &x, &pass, &mut noise_rng)?;
            let (loss, grad) = bce_loss(&y, &as_output(&x, k)?)?;
            if !loss.is_finite() {
                return Err(Error::Diverged {
                    epoch,
                    batch: batch_index,
                    loss,
                });
            }
            graph.backward(&tape, &grad, Some(&chan))?;
            adam.step(&mut graph.params);
            sum += loss * count as f64;
            start += count;
            batch_index += 1;
        }
        let val_loss = evaluate_loss(&graph, k, &val_data, &chan, cfg.seed, cfg.batch)?;
        if !val_loss.is_finite() {
            return Err(Error::Diverged {
                epoch,
                batch: batch_index,
                loss: val_loss,
            });
        }
        let record = EpochRecord {
            epoch,
            train_loss: sum / cfg.n_train as f64,
            val_loss,
        };
        log(&record, clock.elapsed().as_secs_f64());
        history.push(record);
        if val_loss < best.0 {
            best = (val_loss, epoch, graph.params.clone());
            stale = 0;
        } else {
            stale += 1;
            if cfg.patience > 0 && stale >= cfg.patience {
                stopped_early = true;
                break;
            }
        }
    }

    let (_, best_epoch, params) = best;
    graph.params = params;
    Ok(TrainOutcome {
        checkpoint: Checkpoint {
            arch: arch.clone(),
            train: cfg.clone(),
            channel: chan,
            graph,
            history,
            initial_val_loss,
        },
        initial_val_loss,
        best_epoch,
        stopped_early,
    })
}
