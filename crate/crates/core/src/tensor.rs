//! Rank-3 `(batch, length, channels)` array used for every signal and activation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor3 {
    data: Vec<f64>,
    batch: usize,
    len: usize,
    channels: usize,
}

impl Tensor3 {
    pub fn zeros(batch: usize, len: usize, channels: usize) -> Self {
        Self {
            data: vec![0.0; batch * len * channels],
            batch,
            len,
            channels,
        }
    }

    pub fn from_vec(batch: usize, len: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != batch * len * channels {
            return invalid(format!(
                "data length {} does not match shape ({batch}, {len}, {channels})",
                data.len()
            ));
        }
        Ok(Self {
            data,
            batch,
            len,
            channels,
        })
    }

    /// Builds a `(batch, len, 2)` tensor from complex rows, one row per batch item.
    pub fn from_complex_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let len = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != len) {
            return invalid("complex rows must share one length");
        }
        let mut data = Vec::with_capacity(rows.len() * len * 2);
        for row in rows {
            for z in row {
                data.push(z.re);
                data.push(z.im);
            }
        }
        Self::from_vec(rows.len(), len, 2, data)
    }

    pub fn from_complex(symbols: &[Complex64]) -> Self {
        let data = symbols.iter().flat_map(|z| [z.re, z.im]).collect();
        Self {
            data,
            batch: 1,
            len: symbols.len(),
            channels: 2,
        }
    }

    /// Complex view of batch item `b` of a two-channel tensor.
    pub fn complex_row(&self, b: usize) -> Vec<Complex64> {
        debug_assert_eq!(self.channels, 2);
        self.item(b)
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect()
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.batch, self.len, self.channels)
    }

    pub fn batch(&self) -> usize {
        self.batch
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn item(&self, b: usize) -> &[f64] {
        let n = self.len * self.channels;
        &self.data[b * n..(b + 1) * n]
    }

    pub fn item_mut(&mut self, b: usize) -> &mut [f64] {
        let n = self.len * self.channels;
        &mut self.data[b * n..(b + 1) * n]
    }

    #[inline]
    pub fn at(&self, b: usize, l: usize, c: usize) -> f64 {
        self.data[(b * self.len + l) * self.channels + c]
    }

    #[inline]
    pub fn at_mut(&mut self, b: usize, l: usize, c: usize) -> &mut f64 {
        &mut self.data[(b * self.len + l) * self.channels + c]
    }

    /// Reinterprets the same buffer under a new shape with equal element count.
    pub fn reshape(self, batch: usize, len: usize, channels: usize) -> Result<Self> {
        Self::from_vec(batch, len, channels, self.data)
    }

    /// Copies positions `start..start + len` of every batch item.
    pub fn slice_len(&self, start: usize, len: usize) -> Result<Self> {
        if start + len > self.len {
            return invalid(format!(
                "slice {start}..{} out of range for length {}",
                start + len,
                self.len
            ));
        }
        let c = self.channels;
        let mut out = Self::zeros(self.batch, len, c);
        for b in 0..self.batch {
            let src = &self.item(b)[start * c..(start + len) * c];
            out.item_mut(b).copy_from_slice(src);
        }
        Ok(out)
    }

    pub fn shape_string(&self) -> String {
        format!("({}, {}, {})", self.batch, self.len, self.channels)
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
