//! Square Gray-coded QAM with unit average energy.
//!
//! Each group of `k` bits splits into `k/2` in-phase bits followed by `k/2` quadrature
//! bits. Per axis, the bit pattern read MSB-first is a binary-reflected Gray code of the
//! level index, index 0 being the most negative amplitude.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct QamSpec {
    bits_per_symbol: u32,
}

impl TryFrom<u32> for QamSpec {
    type Error = crate::error::Error;

    fn try_from(k: u32) -> Result<Self> {
        QamSpec::new(k)
    }
}

impl From<QamSpec> for u32 {
    fn from(q: QamSpec) -> u32 {
        q.bits_per_symbol
    }
}

impl QamSpec {
    pub fn new(bits_per_symbol: u32) -> Result<Self> {
        if !matches!(bits_per_symbol, 2 | 4 | 6 | 8) {
            return invalid(format!(
                "square QAM needs k in {{2, 4, 6, 8}}, got {bits_per_symbol}"
            ));
        }
        Ok(Self { bits_per_symbol })
    }

    pub fn qam64() -> Self {
        Self { bits_per_symbol: 6 }
    }

    pub fn k(&self) -> usize {
        self.bits_per_symbol as usize
    }

    pub fn order(&self) -> usize {
        1 << self.bits_per_symbol
    }

    /// Amplitude levels per axis.
    pub fn levels(&self) -> usize {
        1 << (self.bits_per_symbol / 2)
    }

    fn axis_bits(&self) -> usize {
        self.k() / 2
    }

    /// `1 / sqrt(2 (L² - 1) / 3)`: scales the integer grid to unit mean energy.
    pub fn scale(&self) -> f64 {
        let l = self.levels() as f64;
        1.0 / (2.0 * (l * l - 1.0) / 3.0).sqrt()
    }

    fn level_value(&self, index: usize) -> f64 {
        (2.0 * index as f64 - (self.levels() as f64 - 1.0)) * self.scale()
    }

    /// Maps a Gray-coded axis word to its amplitude.
    fn axis_value(&self, word: usize) -> f64 {
        self.level_value(gray_decode(word))
    }

    /// Nearest level index; exact midpoints go to the lower level.
    fn slice(&self, v: f64) -> usize {
        let l = self.levels() as f64;
        let t = (v / self.scale() + l - 1.0) / 2.0;
        let idx = (t - 0.5).ceil();
        idx.clamp(0.0, l - 1.0) as usize
    }

    /// Every constellation point indexed by its `k`-bit label (MSB first).
    pub fn constellation(&self) -> Vec<Complex64> {
        let a = self.axis_bits();
        (0..self.order())
            .map(|label| Complex64::new(self.axis_value(label >> a), self.axis_value(label & ((1 << a) - 1))))
            .collect()
    }

    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let k = self.k();
        if bits.len() % k != 0 {
            return invalid(format!("{} bits is not a multiple of k = {k}", bits.len()));
        }
        let a = self.axis_bits();
        Ok(bits
            .chunks_exact(k)
            .map(|g| Complex64::new(self.axis_value(word(&g[..a])), self.axis_value(word(&g[a..]))))
            .collect())
    }

    pub fn demod_hard(&self, symbols: &[Complex64]) -> Vec<u8> {
        let a = self.axis_bits();
        let mut bits = Vec::with_capacity(symbols.len() * self.k());
        for y in symbols {
            push_word(&mut bits, gray_encode(self.slice(y.re)), a);
            push_word(&mut bits, gray_encode(self.slice(y.im)), a);
        }
        bits
    }

    /// Max-log LLRs, positive meaning bit 0 is more likely:
    /// `LLR_b = (min_{s: b=1} |y-s|² - min_{s: b=0} |y-s|²) / N0`.
    ///
    /// The Gray map is separable per axis, so the minimization runs over the `L`
    /// levels of the axis that carries bit `b`.
    pub fn llr(&self, symbols: &[Complex64], n0: f64) -> Result<Vec<f64>> {
        if !(n0 > 0.0) {
            return invalid(format!("noise variance must be > 0, got {n0}"));
        }
        let a = self.axis_bits();
        let words: Vec<usize> = (0..self.levels()).map(gray_encode).collect();
        let mut out = Vec::with_capacity(symbols.len() * self.k());
        for y in symbols {
            for v in [y.re, y.im] {
                for bit in 0..a {
                    let shift = a - 1 - bit;
                    let (mut d0, mut d1) = (f64::INFINITY, f64::INFINITY);
                    for (idx, w) in words.iter().enumerate() {
                        let d = (v - self.level_value(idx)).powi(2);
                        if (w >> shift) & 1 == 0 {
                            d0 = d0.min(d);
                        } else {
                            d1 = d1.min(d);
                        }
                    }
                    out.push((d1 - d0) / n0);
                }
            }
        }
        Ok(out)
    }
}

pub fn gray_encode(i: usize) -> usize {
    i ^ (i >> 1)
}

pub fn gray_decode(mut g: usize) -> usize {
    let mut i = 0;
    while g != 0 {
        i ^= g;
        g >>= 1;
    }
    i
}

fn word(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | (b & 1) as usize)
}

fn push_word(out: &mut Vec<u8>, w: usize, n: usize) {
    for s in (0..n).rev() {
        out.push(((w >> s) & 1) as u8);
    }
}
