use num_complex::Complex64;
use rand::RngCore;

use super::checkpoint::Checkpoint;
use super::data::fill_bits;
use super::train::check_channel;
use crate::channel::{power, ChannelSpec, Domain};
use crate::error::{invalid, Result};
use crate::nn::{ChannelStage, LayerSpec, ModelGraph, Pass};
use crate::tensor::Tensor3;

pub const RADIAL_BINS: usize = 16;

/// Full transmitter → channel → receiver pass with explicit pass options.
///
/// `bits` is `(B, k·M_run, 1)`; the result holds per-bit probabilities in the same layout.
pub fn infer_with(graph: &ModelGraph, k: usize, bits: &Tensor3, pass: &Pass, rng: &mut dyn RngCore) -> Result<Tensor3> {
    if bits.channels() != 1 || bits.len() % k != 0 {
        return invalid(format!(
            "input bits must be shaped (B, k·M, 1) with k = {k}, got {}",
            bits.shape_string()
        ));
    }
    let y = graph.forward(bits, pass, rng)?;
    y.reshape(bits.batch(), bits.len(), 1)
}

/// Runs the checkpoint over `channel` on sequences of `bits.len() / k` symbols.
///
/// Time-domain models accept any length of at least `rx_kernel` symbols; frequency-domain
/// models only accept the subcarrier count they were trained with.
pub fn infer_bits(
    ckpt: &Checkpoint,
    bits: &Tensor3,
    channel: &ChannelSpec,
    rng: &mut dyn RngCore,
) -> Result<(Tensor3, Vec<u8>)> {
    infer_bits_via(ckpt, bits, channel, rng)
}

pub fn infer_bits_via(
    ckpt: &Checkpoint,
    bits: &Tensor3,
    channel: &dyn ChannelStage,
    rng: &mut dyn RngCore,
) -> Result<(Tensor3, Vec<u8>)> {
    let arch = &ckpt.arch;
    let m_run = bits.len() / arch.k;
    match arch.domain {
        Domain::Frequency if m_run != arch.m => {
            return invalid(format!(
                "frequency-domain model is bound to M = {} subcarriers, got {m_run}",
                arch.m
            ))
        }
        Domain::Time if m_run < arch.rx_kernel => {
            return invalid(format!("sequence of {m_run} symbols is shorter than rx_kernel = {}", arch.rx_kernel))
        }
        _ => {}
    }
    let probs = infer_with(&ckpt.graph, arch.k, bits, &Pass { channel: Some(channel), power_gain: None }, rng)?;
    let hard = hard_bits(&probs);
    Ok((probs, hard))
}

impl Checkpoint {
    /// Checks that `channel` can be used with this model before any simulation runs.
    pub fn check_channel(&self, channel: &ChannelSpec) -> Result<()> {
        check_channel(&self.arch, channel)
    }
}

/// Hard decisions: probability ≥ 0.5 gives 1.
/// Receiver over a long received sequence, `chunk` positions at a time.
///
/// Each window is padded with the receiver's receptive-field halo, so the output equals a
/// single full-length pass while the working set stays bounded by the chunk size.
pub fn receive_chunked(graph: &ModelGraph, y: &Tensor3, chunk: usize, rng: &mut dyn RngCore) -> Result<Tensor3> {
    if chunk == 0 {
        return invalid("chunk must be positive");
    }
    let rx = graph.receiver();
    let mut halo = 0;
    for spec in &graph.layers()[rx.clone()] {
        match spec {
            LayerSpec::Conv1d(c) if c.stride == 1 && c.kernel == 2 * c.pad + 1 => halo += c.pad,
            LayerSpec::PositionwiseDense { .. } | LayerSpec::Activation { .. } => {}
            _ => return invalid("chunked reception needs a receiver of same-padded convolutions, dense and activation layers"),
        }
    }
    let (batch, n, _) = y.shape();
    let mut rows: Vec<Vec<f64>> = vec![Vec::new(); batch];
    let mut width = 0;
    for start in (0..n).step_by(chunk) {
        let end = (start + chunk).min(n);
        let lo = start.saturating_sub(halo);
        let hi = (end + halo).min(n);
        let part = graph.forward_range(rx.clone(), &y.slice_len(lo, hi - lo)?, &Pass::default(), rng)?;
        width = part.channels();
        for (b, row) in rows.iter_mut().enumerate() {
            row.extend_from_slice(&part.item(b)[(start - lo) * width..(end - lo) * width]);
        }
    }
    Tensor3::from_vec(batch, n, width, rows.concat())
}

pub fn hard_bits(probs: &Tensor3) -> Vec<u8> {
    probs.data().iter().map(|&p| u8::from(p >= 0.5)).collect()
}

pub fn bit_errors(hard: &[u8], bits: &Tensor3) -> u64 {
    hard.iter().zip(bits.data()).filter(|(&h, &b)| f64::from(h) != b).count() as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    pub points: Vec<Complex64>,
    pub mean_power: f64,
    /// Upper edge of the last radial bin (the largest magnitude observed).
    pub max_radius: f64,
    /// Counts of `|point|` over `RADIAL_BINS` equal bins on `[0, max_radius]`.
    pub radial_histogram: [u64; RADIAL_BINS],
}

/// Transmitter outputs for `n_symbols` random symbols.
pub fn extract_constellation(ckpt: &Checkpoint, n_symbols: usize, rng: &mut dyn RngCore) -> Result<Constellation> {
    if n_symbols == 0 {
        return invalid("n_symbols must be positive");
    }
    let arch = &ckpt.arch;
    let (batch, len) = match arch.domain {
        Domain::Time => (1, n_symbols),
        Domain::Frequency => (n_symbols.div_ceil(arch.m), arch.m),
    };
    let mut bits = Tensor3::zeros(batch, len * arch.k, 1);
    fill_bits(rng, bits.data_mut());
    let tx = ckpt.graph.forward_range(ckpt.graph.transmitter(), &bits, &Pass::default(), rng)?;
    let mut points: Vec<Complex64> = (0..batch).flat_map(|b| tx.complex_row(b)).collect();
    points.truncate(n_symbols);
    let mean_power = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
    let max_radius = points.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let mut radial_histogram = [0u64; RADIAL_BINS];
    for p in &points {
        let bin = if max_radius > 0.0 {
            ((p.norm() / max_radius * RADIAL_BINS as f64) as usize).min(RADIAL_BINS - 1)
        } else {
            0
        };
        radial_histogram[bin] += 1;
    }
    debug_assert!((power::mean_power(&tx) - 1.0).abs() < 1e-9);
    Ok(Constellation {
        points,
        mean_power,
        max_radius,
        radial_histogram,
    })
}
