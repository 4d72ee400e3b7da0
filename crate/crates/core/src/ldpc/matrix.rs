use crate::error::{Error, Result};

/// Sparse binary parity-check matrix with row and column adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityMatrix {
    n: usize,
    cols: Vec<Vec<usize>>,
    rows: Vec<Vec<usize>>,
}

impl ParityMatrix {
    /// Builds `H` from the column indices of each row's ones.
    pub fn from_rows(n: usize, rows: Vec<Vec<usize>>) -> Result<Self> {
        let mut cols = vec![Vec::new(); n];
        for (r, row) in rows.iter().enumerate() {
            for &c in row {
                if c >= n {
                    return Err(Error::InvalidArgument(format!("row {r}: column {c} out of range (n = {n})")));
                }
                if cols[c].last() == Some(&r) {
                    return Err(Error::InvalidArgument(format!("row {r}: column {c} listed twice")));
                }
                cols[c].push(r);
            }
        }
        Ok(Self { n, cols, rows })
    }

    /// Codeword length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of parity checks.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn cols(&self) -> &[Vec<usize>] {
        &self.cols
    }

    pub fn edges(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// True iff `H · bitsᵀ = 0` over GF(2).
    pub fn syndrome_ok(&self, bits: &[u8]) -> bool {
        debug_assert_eq!(bits.len(), self.n);
        self.rows
            .iter()
            .all(|row| row.iter().fold(0u8, |acc, &c| acc ^ (bits[c] & 1)) == 0)
    }

    pub fn check_length(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::InvalidArgument(format!("expected {} bits, got {len}", self.n)));
        }
        Ok(())
    }

    /// Packed dense rows, `ceil(n / 64)` words each.
    pub(crate) fn dense_rows(&self) -> Vec<Vec<u64>> {
        let words = self.n.div_ceil(64);
        self.rows
            .iter()
            .map(|row| {
                let mut w = vec![0u64; words];
                for &c in row {
                    w[c / 64] ^= 1 << (c % 64);
                }
                w
            })
            .collect()
    }
}

/// Checks a codeword against `H`; length mismatches are reported as errors.
pub fn syndrome_check(bits: &[u8], h: &ParityMatrix) -> Result<bool> {
    h.check_length(bits.len())?;
    Ok(h.syndrome_ok(bits))
}
