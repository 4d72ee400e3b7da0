use super::alist::load_alist;
use super::matrix::ParityMatrix;
use crate::error::{invalid, Error, Result};

/// A parity-check matrix together with its systematic encoder.
///
/// Gaussian elimination over GF(2) picks one pivot column per check; the remaining
/// columns carry information bits in increasing order and each pivot bit is the parity
/// of the information bits in its reduced row.
#[derive(Debug, Clone)]
pub struct LdpcCode {
    h: ParityMatrix,
    info_positions: Vec<usize>,
    pivots: Vec<usize>,
    /// Reduced rows restricted to information columns, packed over info index.
    parity_rows: Vec<Vec<u64>>,
}

impl LdpcCode {
    pub fn new(h: ParityMatrix) -> Result<Self> {
        let n = h.n();
        let m = h.m();
        let mut rows = h.dense_rows();
        let bit = |row: &[u64], c: usize| (row[c / 64] >> (c % 64)) & 1 == 1;
        let mut pivots = Vec::with_capacity(m);
        let mut is_pivot = vec![false; n];
        let mut r = 0;
        // Scan columns from the right so parity bits tend to land at the end.
        for c in (0..n).rev() {
            if r == m {
                break;
            }
            let Some(p) = (r..m).find(|&i| bit(&rows[i], c)) else {
                continue;
            };
            rows.swap(r, p);
            let pivot_row = rows[r].clone();
            for (i, row) in rows.iter_mut().enumerate() {
                if i != r && bit(row, c) {
                    row.iter_mut().zip(&pivot_row).for_each(|(a, b)| *a ^= b);
                }
            }
            pivots.push(c);
            is_pivot[c] = true;
            r += 1;
        }
        if r < m {
            return Err(Error::RankDeficient { rank: r, expected: m });
        }
        let info_positions: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let words = info_positions.len().div_ceil(64);
        let parity_rows = rows
            .iter()
            .map(|row| {
                let mut packed = vec![0u64; words];
                for (i, &c) in info_positions.iter().enumerate() {
                    if bit(row, c) {
                        packed[i / 64] |= 1 << (i % 64);
                    }
                }
                packed
            })
            .collect();
        Ok(Self {
            h,
            info_positions,
            pivots,
            parity_rows,
        })
    }

    pub fn from_alist(text: &str) -> Result<Self> {
        Self::new(load_alist(text)?)
    }

    pub fn h(&self) -> &ParityMatrix {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }

    /// Information bits per codeword.
    pub fn k(&self) -> usize {
        self.info_positions.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    /// Codeword positions that carry the information bits, in order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_positions
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k() {
            return invalid(format!("expected {} information bits, got {}", self.k(), info.len()));
        }
        let mut packed = vec![0u64; self.k().div_ceil(64)];
        for (i, &b) in info.iter().enumerate() {
            if b & 1 == 1 {
                packed[i / 64] |= 1 << (i % 64);
            }
        }
        let mut word = vec![0u8; self.n()];
        for (&pos, &b) in self.info_positions.iter().zip(info) {
            word[pos] = b & 1;
        }
        for (row, &pivot) in self.parity_rows.iter().zip(&self.pivots) {
            let ones: u32 = row.iter().zip(&packed).map(|(a, b)| (a & b).count_ones()).sum();
            word[pivot] = (ones & 1) as u8;
        }
        Ok(word)
    }

    pub fn extract_info(&self, word: &[u8]) -> Vec<u8> {
        self.info_positions.iter().map(|&p| word[p]).collect()
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::ldpc::TOY_ALIST;

    #[test]
    fn toy_code_dimensions() {
        let code = LdpcCode::from_alist(TOY_ALIST).unwrap();
        assert_eq!((code.n(), code.k()), (8, 4));
        assert_eq!(code.rate(), 0.5);
    }

    #[test]
    fn zero_info_gives_zero_word() {
        let code = LdpcCode::from_alist(TOY_ALIST).unwrap();
        assert_eq!(code.encode(&[0; 4]).unwrap(), vec![0; 8]);
    }

    #[test]
    fn unit_info_matches_brute_force() {
        let code = LdpcCode::from_alist(TOY_ALIST).unwrap();
        let word = code.encode(&[1, 0, 0, 0]).unwrap();
        // Exhaustive search over all 2^8 words for the unique codeword with this info part.
        let candidates: Vec<Vec<u8>> = (0u32..256)
            .map(|v| (0..8).map(|i| ((v >> i) & 1) as u8).collect::<Vec<u8>>())
            .filter(|w| code.h().syndrome_ok(w) && code.extract_info(w) == [1, 0, 0, 0])
            .collect();
        assert_eq!(candidates, vec![word]);
    }

    #[test]
    fn random_codewords_satisfy_checks() {
        let code = LdpcCode::from_alist(TOY_ALIST).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let info: Vec<u8> = (0..4).map(|_| rng.random_range(0..2)).collect();
            let w = code.encode(&info).unwrap();
            assert!(code.h().syndrome_ok(&w));
            assert_eq!(code.extract_info(&w), info);
        }
    }

    #[test]
    fn rank_deficient_matrix_rejected() {
        // Rows 0 and 1 are identical.
        let h = ParityMatrix::from_rows(4, vec![vec![0, 1], vec![0, 1], vec![2, 3]]).unwrap();
        assert!(matches!(LdpcCode::new(h), Err(Error::RankDeficient { rank: 2, expected: 3 })));
    }
}
