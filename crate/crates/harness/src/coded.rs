//! LDPC-coded links: encode → interleave → link → deinterleave → sum-product decode.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use convphy::channel::ChannelSpec;
use convphy::ldpc::{BpDecoder, LdpcCode};
use convphy::Result;

use crate::link::Link;
use crate::sweep::{random_bits, task_rng, validate_grid, BerRecord, Purpose, StoppingRule};

pub struct CodedLink<'a> {
    pub link: &'a dyn Link,
    pub code: &'a LdpcCode,
    pub decoder: BpDecoder,
    pub max_iters: usize,
    /// Coded-bit permutation applied before the link; `perm[i]` is the link position of coded bit `i`.
    perm: Vec<usize>,
    codewords: usize,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl<'a> CodedLink<'a> {
    /// A frame holds the least number of codewords that fills whole link frames.
    pub fn new(link: &'a dyn Link, code: &'a LdpcCode, max_iters: usize, interleaver_seed: u64) -> Self {
        let n = code.n();
        let f = link.frame_bits();
        let total = n / gcd(n, f) * f;
        let mut perm: Vec<usize> = (0..total).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(interleaver_seed));
        Self {
            link,
            code,
            decoder: BpDecoder::new(code.h()),
            max_iters,
            perm,
            codewords: total / n,
        }
    }

    pub fn info_bits_per_frame(&self) -> usize {
        self.codewords * self.code.k()
    }

    /// Returns `(info bits, info-bit errors)` for one frame.
    pub fn run_frame(&self, bit_rng: &mut ChaCha8Rng, channel: &ChannelSpec, noise_rng: &mut ChaCha8Rng) -> Result<(u64, u64)> {
        let (n, k) = (self.code.n(), self.code.k());
        let info = random_bits(bit_rng, self.info_bits_per_frame());
        let mut coded = Vec::with_capacity(self.perm.len());
        for chunk in info.chunks(k) {
            coded.extend(self.code.encode(chunk)?);
        }
        let mut tx = vec![0u8; coded.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            tx[p] = coded[i];
        }
        let mut llr_tx = Vec::with_capacity(tx.len());
        for frame in tx.chunks(self.link.frame_bits()) {
            llr_tx.extend(self.link.run(frame, channel, noise_rng, true)?.llr);
        }
        let llr: Vec<f64> = self.perm.iter().map(|&p| llr_tx[p]).collect();
        let mut errors = 0u64;
        for (c, word_llr) in llr.chunks(n).enumerate() {
            let out = self.decoder.decode(word_llr, self.max_iters)?;
            let decoded = self.code.extract_info(&out.bits);
            errors += decoded.iter().zip(&info[c * k..(c + 1) * k]).filter(|(a, b)| a != b).count() as u64;
        }
        Ok((info.len() as u64, errors))
    }

    pub fn ber_point(&self, channel: &ChannelSpec, snr_db: f64, rule: &StoppingRule, seed: u64, task: u64) -> Result<BerRecord> {
        let ch = channel.with_snr(snr_db);
        let mut bit_rng = task_rng(seed, task, Purpose::Bits);
        let mut noise_rng = task_rng(seed, task, Purpose::Noise);
        let clock = Instant::now();
        let (mut bits, mut errors) = (0u64, 0u64);
        while !rule.done(bits, errors) {
            let (b, e) = self.run_frame(&mut bit_rng, &ch, &mut noise_rng)?;
            bits += b;
            errors += e;
        }
        Ok(BerRecord::new(snr_db, bits, errors, clock.elapsed().as_secs_f64()))
    }
}

/// Info-bit BER of the coded link over an SNR grid.
pub fn ldpc_pipeline(coded: &CodedLink, channel: &ChannelSpec, snrs: &[f64], rule: &StoppingRule, seed: u64) -> Result<Vec<BerRecord>> {
    validate_grid(snrs)?;
    coded.link.check(channel)?;
    snrs.iter()
        .enumerate()
        .map(|(i, &s)| coded.ber_point(channel, s, rule, seed, i as u64))
        .collect()
}
