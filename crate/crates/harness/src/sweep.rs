//! Monte-Carlo BER sweeps.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use convphy::channel::ChannelSpec;
use convphy::{Error, Result};

use crate::link::Link;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StoppingRule {
    pub min_bit_errors: u64,
    pub max_bits: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_bit_errors: 100,
            max_bits: 10_000_000,
        }
    }
}

impl StoppingRule {
    pub fn done(&self, bits: u64, errors: u64) -> bool {
        errors >= self.min_bit_errors || bits >= self.max_bits
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub snr_db: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub seconds: f64,
}

impl BerRecord {
    pub fn new(snr_db: f64, bits: u64, errors: u64, seconds: f64) -> Self {
        Self {
            snr_db,
            bits,
            errors,
            ber: if bits == 0 { 0.0 } else { errors as f64 / bits as f64 },
            seconds,
        }
    }

    /// Binomial standard error of the BER estimate.
    pub fn std_error(&self) -> f64 {
        if self.bits == 0 {
            return 0.0;
        }
        (self.ber * (1.0 - self.ber) / self.bits as f64).sqrt()
    }

    /// Normal-approximation 95% interval, floored at zero.
    pub fn ci95(&self) -> (f64, f64) {
        let h = 1.96 * self.std_error();
        ((self.ber - h).max(0.0), self.ber + h)
    }
}

/// What a per-task RNG stream is used for.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Purpose {
    Bits = 0,
    Noise = 1,
    Taps = 2,
}

/// Stream for task `task` of a run seeded with `seed`; independent of scheduling order.
pub fn task_rng(seed: u64, task: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((task << 4) | purpose as u64);
    rng
}

pub(crate) fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    use rand::RngCore;
    let mut out = Vec::with_capacity(n + 64);
    while out.len() < n {
        let mut w = rng.next_u64();
        for _ in 0..64 {
            out.push((w & 1) as u8);
            w >>= 1;
        }
    }
    out.truncate(n);
    out
}

pub fn validate_grid(snrs: &[f64]) -> Result<()> {
    if snrs.is_empty() {
        return Err(Error::InvalidArgument("SNR grid is empty".into()));
    }
    if snrs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("SNR grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Streams frames through `link` at one SNR until `rule` fires.
///
/// Bits and noise come from separate streams of task `task`, so two links with the same
/// frame layout see identical bits and noise.
pub fn ber_point(link: &dyn Link, channel: &ChannelSpec, snr_db: f64, rule: &StoppingRule, seed: u64, task: u64) -> Result<BerRecord> {
    let ch = channel.with_snr(snr_db);
    let mut bit_rng = task_rng(seed, task, Purpose::Bits);
    let mut noise_rng = task_rng(seed, task, Purpose::Noise);
    let clock = Instant::now();
    let (mut bits, mut errors) = (0u64, 0u64);
    while !rule.done(bits, errors) {
        let tx = random_bits(&mut bit_rng, link.frame_bits());
        let out = link.run(&tx, &ch, &mut noise_rng, false)?;
        errors += tx.iter().zip(&out.hard).filter(|(a, b)| a != b).count() as u64;
        bits += tx.len() as u64;
    }
    Ok(BerRecord::new(snr_db, bits, errors, clock.elapsed().as_secs_f64()))
}

pub fn ber_sweep(link: &dyn Link, channel: &ChannelSpec, snrs: &[f64], rule: &StoppingRule, seed: u64) -> Result<Vec<BerRecord>> {
    validate_grid(snrs)?;
    link.check(channel)?;
    snrs.iter()
        .enumerate()
        .map(|(i, &s)| ber_point(link, channel, s, rule, seed, i as u64))
        .collect()
}

/// Whether two links consume bits and noise in the same layout on `channel`.
pub fn common_random_numbers(a: &dyn Link, b: &dyn Link, channel: &ChannelSpec) -> bool {
    a.frame_bits() == b.frame_bits() && {
        let (ra, la) = a.frame_shape(channel);
        let (rb, lb) = b.frame_shape(channel);
        ra * la == rb * lb
    }
}

/// SNR at which `records` cross `target` BER, interpolating `log10(BER)` linearly.
pub fn snr_at_ber(records: &[BerRecord], target: f64) -> Option<f64> {
    records.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.ber >= target && b.ber <= target && a.ber > 0.0 {
            if b.ber <= 0.0 {
                return Some(b.snr_db);
            }
            let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
            if la == lb {
                return Some(a.snr_db);
            }
            Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db))
        } else {
            None
        }
    })
}
