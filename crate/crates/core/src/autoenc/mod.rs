//! Convolutional autoencoder transceivers with the channel inside the training loop.

mod checkpoint;
mod data;
mod infer;
mod train;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::Checkpoint;
pub use data::{gen_dataset, stream_rng, Stream};
pub use infer::{bit_errors, extract_constellation, hard_bits, infer_bits, infer_bits_via, infer_with, receive_chunked, Constellation, RADIAL_BINS};
pub use train::{evaluate_loss, train, EpochRecord, TrainOutcome};

use crate::channel::Domain;
use crate::error::{invalid, Result};
use crate::nn::{Activation, ConvSpec, LayerSpec, ModelGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArchConfig {
    /// Bits per symbol.
    pub k: usize,
    /// Symbols per training sequence.
    pub m: usize,
    pub hidden: usize,
    pub tx_kernel: usize,
    pub rx_kernel: usize,
    pub domain: Domain,
}

impl Default for ArchConfig {
    fn default() -> Self {
        Self {
            k: 6,
            m: 400,
            hidden: 32,
            tx_kernel: 1,
            rx_kernel: 9,
            domain: Domain::Time,
        }
    }
}

impl ArchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.hidden == 0 || self.tx_kernel == 0 || self.rx_kernel == 0 {
            return invalid("k, hidden, tx_kernel and rx_kernel must be positive");
        }
        if self.m < self.rx_kernel {
            return invalid(format!("M = {} is shorter than rx_kernel = {}", self.m, self.rx_kernel));
        }
        if self.tx_kernel % 2 == 0 || self.rx_kernel % 2 == 0 {
            return invalid("tx_kernel and rx_kernel must be odd for same-length padding");
        }
        Ok(())
    }

    pub fn bits_per_sequence(&self) -> usize {
        self.k * self.m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub n_train: usize,
    pub n_test: usize,
    pub batch: usize,
    pub lr: f64,
    pub snr_db: f64,
    pub epochs: usize,
    /// Epochs without validation improvement before stopping; 0 disables early stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_train: 30_000,
            n_test: 10_000,
            batch: 32,
            lr: 0.001,
            snr_db: 12.0,
            epochs: 40,
            patience: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_train == 0 || self.n_test == 0 || self.batch == 0 || self.epochs == 0 {
            return invalid("n_train, n_test, batch and epochs must be positive");
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return invalid(format!("learning rate must be positive, got {}", self.lr));
        }
        Ok(())
    }
}

fn same(i: usize, o: usize, kernel: usize) -> LayerSpec {
    if kernel == 1 {
        LayerSpec::dense(i, o)
    } else {
        LayerSpec::Conv1d(ConvSpec::same(i, o, kernel))
    }
}

fn local(i: usize, o: usize, kernel: usize, input_len: usize) -> LayerSpec {
    LayerSpec::LocallyConnected1d {
        conv: ConvSpec::same(i, o, kernel),
        input_len,
    }
}

/// Layer list for either domain. Input is `(B, k·M, 1)` bits, output `(B, M, k)` probabilities.
pub fn layer_recipe(arch: &ArchConfig) -> Result<Vec<LayerSpec>> {
    arch.validate()?;
    let (k, f, m) = (arch.k, arch.hidden, arch.m);
    let freq = arch.domain == Domain::Frequency;
    let relu = || LayerSpec::act(Activation::Relu);
    Ok(vec![
        LayerSpec::Conv1d(ConvSpec::new(1, f, k, k, 0)),
        relu(),
        LayerSpec::dense(f, f),
        relu(),
        if freq { local(f, f, 5, m) } else { same(f, f, 5) },
        relu(),
        same(f, 2, arch.tx_kernel),
        LayerSpec::act(Activation::Linear),
        LayerSpec::PowerNormalize,
        LayerSpec::ChannelSlot,
        if freq { local(2, f, arch.rx_kernel, m) } else { same(2, f, arch.rx_kernel) },
        relu(),
        same(f, f, 5),
        relu(),
        LayerSpec::dense(f, k),
        LayerSpec::act(Activation::Sigmoid),
    ])
}

fn build(arch: &ArchConfig, seed: u64) -> Result<ModelGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(Stream::Init as u64);
    ModelGraph::new(layer_recipe(arch)?, 1, arch.bits_per_sequence(), &mut rng)
}

/// Time-domain transceiver; accepts any sequence length at inference.
pub fn build_time_model(arch: &ArchConfig, seed: u64) -> Result<ModelGraph> {
    if arch.domain != Domain::Time {
        return invalid("build_time_model needs a time-domain architecture");
    }
    build(arch, seed)
}

/// Frequency-domain transceiver with position-specific kernels bound to `M` subcarriers.
pub fn build_freq_model(arch: &ArchConfig, seed: u64) -> Result<ModelGraph> {
    if arch.domain != Domain::Frequency {
        return invalid("build_freq_model needs a frequency-domain architecture");
    }
    build(arch, seed)
}

pub fn build_model(arch: &ArchConfig, seed: u64) -> Result<ModelGraph> {
    build(arch, seed)
}
