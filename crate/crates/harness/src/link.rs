//! End-to-end links: bits in, hard decisions and LLRs out.

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use convphy::autoenc::{infer_bits_via, Checkpoint};
use convphy::baselines::{block_stats, equalize, equalize_block, equalizer_weights, freq_response, EqualizerKind, QamSpec};
use convphy::channel::{noise_variance, ChannelResponse, ChannelSpec, ChannelTaps};
use convphy::nn::ChannelStage;
use convphy::{Error, Result, Tensor3};

/// LLR magnitude limit applied to soft outputs.
pub const LLR_LIMIT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinkOutput {
    pub hard: Vec<u8>,
    /// Positive means bit 0 is more likely; empty unless soft output was requested.
    pub llr: Vec<f64>,
}

pub trait Link {
    /// Bits consumed by one call to [`Link::run`].
    fn frame_bits(&self) -> usize;
    /// Complex samples placed on the channel per frame, as `(rows, length)`.
    fn frame_shape(&self, channel: &ChannelSpec) -> (usize, usize);
    fn run(&self, bits: &[u8], channel: &ChannelSpec, rng: &mut dyn RngCore, soft: bool) -> Result<LinkOutput>;
    fn check(&self, channel: &ChannelSpec) -> Result<()>;
    fn name(&self) -> String;
}

/// `ln((1 - p) / p)` clamped to `±LLR_LIMIT`.
pub fn prob_to_llr(p: f64) -> f64 {
    if p <= 0.0 {
        return LLR_LIMIT;
    }
    if p >= 1.0 {
        return -LLR_LIMIT;
    }
    ((1.0 - p) / p).ln().clamp(-LLR_LIMIT, LLR_LIMIT)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equalizer {
    Zf,
    Mmse,
}

/// Gray QAM with block equalization and perfect (or deliberately stale) channel knowledge.
///
/// Time-domain channels use cyclic-prefixed blocks of `block` symbols equalized by
/// FFT → per-bin equalizer → IFFT. Frequency-domain channels place one symbol per subcarrier
/// and equalize per bin. Hard decisions slice the equalizer output as is unless `unbiased`
/// is set, in which case the MMSE bias is divided out first. LLRs always account for the bias.
#[derive(Debug, Clone)]
pub struct QamLink {
    pub qam: QamSpec,
    pub equalizer: Equalizer,
    pub block: usize,
    pub frame_symbols: usize,
    /// Channel assumed by the receiver; `None` means the true channel.
    pub csi: Option<ChannelResponse>,
    pub unbiased: bool,
}

impl QamLink {
    pub fn new(qam: QamSpec, equalizer: Equalizer, block: usize, frame_symbols: usize) -> Self {
        Self {
            qam,
            equalizer,
            block,
            frame_symbols,
            csi: None,
            unbiased: false,
        }
    }

    fn kind(&self, n0: f64) -> EqualizerKind {
        match self.equalizer {
            Equalizer::Zf => EqualizerKind::Zf,
            Equalizer::Mmse => EqualizerKind::Mmse { n0 },
        }
    }

    fn receiver_taps<'a>(&'a self, taps: &'a ChannelTaps) -> Result<&'a ChannelTaps> {
        match &self.csi {
            None => Ok(taps),
            Some(ChannelResponse::Time { taps }) => Ok(taps),
            Some(ChannelResponse::Frequency { .. }) => {
                Err(Error::DomainMismatch("frequency-domain CSI for a time-domain channel".into()))
            }
        }
    }

    fn prefix_len(&self, taps: &ChannelTaps) -> Result<usize> {
        Ok(taps.span().max(self.receiver_taps(taps)?.span()) - 1)
    }

    /// `raw` is the equalizer output, `eq` the same with the bias removed.
    fn slice(&self, raw: &[Complex64], eq: &[Complex64], n0_eff: &[f64], soft: bool, out: &mut LinkOutput) -> Result<()> {
        out.hard.extend(self.qam.demod_hard(if self.unbiased { eq } else { raw }));
        if soft {
            if n0_eff.iter().all(|&v| v == n0_eff[0]) {
                out.llr.extend(self.qam.llr(eq, n0_eff[0].max(1e-300))?);
            } else {
                for (s, &n0) in eq.iter().zip(n0_eff) {
                    if n0.is_finite() {
                        out.llr.extend(self.qam.llr(std::slice::from_ref(s), n0.max(1e-300))?);
                    } else {
                        out.llr.extend(std::iter::repeat_n(0.0, self.qam.k()));
                    }
                }
            }
        }
        Ok(())
    }

    fn run_time(&self, symbols: &[Complex64], channel: &ChannelSpec, taps: &ChannelTaps, rng: &mut dyn RngCore, soft: bool) -> Result<LinkOutput> {
        let n0 = noise_variance(channel.noise.snr_db);
        let mut out = LinkOutput::default();
        let rx_taps = self.receiver_taps(taps)?;
        if taps.span() == 1 && rx_taps.span() == 1 && rx_taps.coeffs()[0] == Complex64::new(1.0, 0.0) && taps.coeffs()[0] == Complex64::new(1.0, 0.0) {
            // Flat unit channel: equalization is the identity.
            let y = channel.apply(&Tensor3::from_complex(symbols), rng)?.complex_row(0);
            self.slice(&y, &y, &[n0], soft, &mut out)?;
            return Ok(out);
        }
        let cp = self.prefix_len(taps)?;
        let b = self.block;
        let mut stream = Vec::with_capacity(symbols.len() / b * (b + cp));
        for blk in symbols.chunks(b) {
            stream.extend_from_slice(&blk[b - cp..]);
            stream.extend_from_slice(blk);
        }
        let y = channel.apply(&Tensor3::from_complex(&stream), rng)?.complex_row(0);
        let gains = freq_response(rx_taps, b)?;
        let kind = self.kind(n0);
        let stats = block_stats(&gains, kind, n0)?;
        let (bias, n0_eff) = match self.equalizer {
            Equalizer::Mmse => (stats.bias, stats.unbiased_noise()),
            Equalizer::Zf => (Complex64::new(1.0, 0.0), stats.distortion),
        };
        for blk in y.chunks(b + cp) {
            let raw = equalize_block(&blk[cp..], &gains, kind)?;
            let eq: Vec<Complex64> = raw.iter().map(|v| v / bias).collect();
            self.slice(&raw, &eq, &[n0_eff], soft, &mut out)?;
        }
        Ok(out)
    }

    fn run_freq(&self, symbols: &[Complex64], channel: &ChannelSpec, gains: &[Complex64], rng: &mut dyn RngCore, soft: bool) -> Result<LinkOutput> {
        let n0 = noise_variance(channel.noise.snr_db);
        let rx_gains = match &self.csi {
            None => gains,
            Some(ChannelResponse::Frequency { gains }) => gains.as_slice(),
            Some(ChannelResponse::Time { .. }) => {
                return Err(Error::DomainMismatch("time-domain CSI for a frequency-domain channel".into()))
            }
        };
        let n = gains.len();
        let rows: Vec<Vec<Complex64>> = symbols.chunks(n).map(<[Complex64]>::to_vec).collect();
        let y = channel.apply(&Tensor3::from_complex_rows(&rows)?, rng)?;
        let kind = self.kind(n0);
        let w = equalizer_weights(rx_gains, kind)?;
        // Per-bin bias `w·H` is divided out; erased bins stay at zero with an infinite noise level.
        let bias: Vec<Complex64> = w.iter().zip(rx_gains).map(|(a, h)| a * h).collect();
        let n0_eff: Vec<f64> = w
            .iter()
            .zip(&bias)
            .map(|(a, g)| if g.norm() > 0.0 { n0 * a.norm_sqr() / g.norm_sqr() } else { f64::INFINITY })
            .collect();
        let mut out = LinkOutput::default();
        for r in 0..y.batch() {
            let raw = equalize(&y.complex_row(r), rx_gains, kind)?;
            let eq: Vec<Complex64> = raw.iter().zip(&bias).map(|(v, g)| if g.norm() > 0.0 { v / g } else { *v }).collect();
            self.slice(&raw, &eq, &n0_eff, soft, &mut out)?;
        }
        Ok(out)
    }
}

impl Link for QamLink {
    fn frame_bits(&self) -> usize {
        self.frame_symbols * self.qam.k()
    }

    fn frame_shape(&self, channel: &ChannelSpec) -> (usize, usize) {
        match &channel.response {
            ChannelResponse::Frequency { gains } => (self.frame_symbols / gains.len(), gains.len()),
            ChannelResponse::Time { taps } => {
                let cp = self.prefix_len(taps).unwrap_or(0);
                if cp == 0 {
                    (1, self.frame_symbols)
                } else {
                    (1, self.frame_symbols / self.block * (self.block + cp))
                }
            }
        }
    }

    fn check(&self, channel: &ChannelSpec) -> Result<()> {
        match &channel.response {
            ChannelResponse::Time { taps } => {
                let cp = self.prefix_len(taps)?;
                if !self.block.is_power_of_two() || self.block <= cp || self.frame_symbols % self.block != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "block of {} symbols must be a power of two longer than the prefix ({cp}) and divide the frame ({})",
                        self.block, self.frame_symbols
                    )));
                }
            }
            ChannelResponse::Frequency { gains } => {
                if self.frame_symbols % gains.len() != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "frame of {} symbols is not a whole number of {}-subcarrier blocks",
                        self.frame_symbols,
                        gains.len()
                    )));
                }
                if let Some(ChannelResponse::Frequency { gains: g }) = &self.csi {
                    if g.len() != gains.len() {
                        return Err(Error::InvalidArgument("CSI subcarrier count differs from the channel".into()));
                    }
                }
            }
        }
        Ok(())
    }

    fn run(&self, bits: &[u8], channel: &ChannelSpec, rng: &mut dyn RngCore, soft: bool) -> Result<LinkOutput> {
        let symbols = self.qam.modulate(bits)?;
        match &channel.response {
            ChannelResponse::Time { taps } => self.run_time(&symbols, channel, taps, rng, soft),
            ChannelResponse::Frequency { gains } => self.run_freq(&symbols, channel, gains, rng, soft),
        }
    }

    fn name(&self) -> String {
        let eq = match self.equalizer {
            Equalizer::Zf => "ZF",
            Equalizer::Mmse => "MMSE",
        };
        format!("{}QAM+{eq}", self.qam.order())
    }
}

/// A trained autoencoder run on `batch` sequences of `m_run` symbols per frame.
#[derive(Debug, Clone)]
pub struct LearnedLink {
    pub ckpt: Checkpoint,
    pub m_run: usize,
    pub batch: usize,
}

impl LearnedLink {
    pub fn new(ckpt: Checkpoint, m_run: usize, batch: usize) -> Self {
        Self { ckpt, m_run, batch }
    }

    /// Runs the link through an arbitrary channel stage (used for frozen-noise comparisons).
    pub fn run_stage(&self, bits: &[u8], channel: &dyn ChannelStage, rng: &mut dyn RngCore, soft: bool) -> Result<LinkOutput> {
        let k = self.ckpt.arch.k;
        let rows = bits.len() / (k * self.m_run);
        let input = Tensor3::from_vec(rows, k * self.m_run, 1, bits.iter().map(|&b| f64::from(b)).collect())?;
        let (probs, hard) = infer_bits_via(&self.ckpt, &input, channel, rng)?;
        let llr = if soft { probs.data().iter().map(|&p| prob_to_llr(p)).collect() } else { Vec::new() };
        Ok(LinkOutput { hard, llr })
    }
}

impl Link for LearnedLink {
    fn frame_bits(&self) -> usize {
        self.batch * self.m_run * self.ckpt.arch.k
    }

    fn frame_shape(&self, _: &ChannelSpec) -> (usize, usize) {
        (self.batch, self.m_run)
    }

    fn check(&self, channel: &ChannelSpec) -> Result<()> {
        self.ckpt.check_channel(channel)
    }

    fn run(&self, bits: &[u8], channel: &ChannelSpec, rng: &mut dyn RngCore, soft: bool) -> Result<LinkOutput> {
        self.run_stage(bits, channel, rng, soft)
    }

    fn name(&self) -> String {
        "learned".into()
    }
}
