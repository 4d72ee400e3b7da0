use super::matrix::ParityMatrix;
use crate::error::Result;

pub const LLR_CLAMP: f64 = 30.0;
pub const MESSAGE_CLAMP: f64 = 25.0;
pub const DEFAULT_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub bits: Vec<u8>,
    pub converged: bool,
    pub iterations: usize,
}

/// Flooding sum-product decoder. LLRs are positive when bit 0 is more likely.
///
/// Edges are numbered in row order; `col_edges` maps each variable to its edges.
#[derive(Debug, Clone)]
pub struct BpDecoder {
    h: ParityMatrix,
    row_start: Vec<usize>,
    edge_col: Vec<usize>,
    col_edges: Vec<Vec<usize>>,
}

fn clamp(v: f64, limit: f64) -> f64 {
    v.clamp(-limit, limit)
}

impl BpDecoder {
    pub fn new(h: &ParityMatrix) -> Self {
        let mut row_start = Vec::with_capacity(h.m() + 1);
        let mut edge_col = Vec::with_capacity(h.edges());
        let mut col_edges = vec![Vec::new(); h.n()];
        row_start.push(0);
        for row in h.rows() {
            for &c in row {
                col_edges[c].push(edge_col.len());
                edge_col.push(c);
            }
            row_start.push(edge_col.len());
        }
        Self {
            h: h.clone(),
            row_start,
            edge_col,
            col_edges,
        }
    }

    pub fn h(&self) -> &ParityMatrix {
        &self.h
    }

    /// Check-to-variable update by the tanh rule, excluding each edge's own input.
    fn check_update(&self, v2c: &[f64], c2v: &mut [f64], t: &mut Vec<f64>) {
        for r in 0..self.h.m() {
            let edges = self.row_start[r]..self.row_start[r + 1];
            t.clear();
            t.extend(v2c[edges.clone()].iter().map(|&m| (0.5 * m).tanh()));
            // Prefix/suffix products avoid dividing by a zero tanh.
            let d = t.len();
            let mut prefix = 1.0;
            let out = &mut c2v[edges];
            for i in 0..d {
                out[i] = prefix;
                prefix *= t[i];
            }
            let mut suffix = 1.0;
            for i in (0..d).rev() {
                let p = out[i] * suffix;
                suffix *= t[i];
                out[i] = clamp(2.0 * p.atanh(), MESSAGE_CLAMP);
            }
        }
    }

    /// Messages every check sends after the first half-iteration.
    ///
    /// Returned in edge order (row by row, columns ascending).
    pub fn first_check_messages(&self, llr: &[f64]) -> Result<Vec<f64>> {
        self.h.check_length(llr.len())?;
        let v2c: Vec<f64> = self.edge_col.iter().map(|&c| clamp(llr[c], LLR_CLAMP)).collect();
        let mut c2v = vec![0.0; v2c.len()];
        self.check_update(&v2c, &mut c2v, &mut Vec::new());
        Ok(c2v)
    }

    pub fn decode(&self, llr: &[f64], max_iters: usize) -> Result<DecodeOutput> {
        self.h.check_length(llr.len())?;
        let n = self.h.n();
        let prior: Vec<f64> = llr
            .iter()
            .map(|&l| if l.is_nan() { 0.0 } else { clamp(l, LLR_CLAMP) })
            .collect();
        let mut v2c: Vec<f64> = self.edge_col.iter().map(|&c| prior[c]).collect();
        let mut c2v = vec![0.0; v2c.len()];
        let mut bits: Vec<u8> = prior.iter().map(|&l| u8::from(l < 0.0)).collect();
        let mut scratch = Vec::new();
        for iter in 1..=max_iters {
            self.check_update(&v2c, &mut c2v, &mut scratch);
            for c in 0..n {
                let edges = &self.col_edges[c];
                let total = prior[c] + edges.iter().map(|&e| c2v[e]).sum::<f64>();
                bits[c] = u8::from(total < 0.0);
                for &e in edges {
                    v2c[e] = clamp(total - c2v[e], MESSAGE_CLAMP);
                }
            }
            if self.h.syndrome_ok(&bits) {
                return Ok(DecodeOutput {
                    bits,
                    converged: true,
                    iterations: iter,
                });
            }
        }
        Ok(DecodeOutput {
            bits,
            converged: false,
            iterations: max_iters,
        })
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::ldpc::{LdpcCode, TOY_ALIST};

    fn strong(word: &[u8]) -> Vec<f64> {
        word.iter().map(|&b| if b == 1 { -20.0 } else { 20.0 }).collect()
    }

    #[test]
    fn noiseless_codeword_converges_in_one_iteration() {
        let code = LdpcCode::from_alist(TOY_ALIST).unwrap();
        let dec = BpDecoder::new(code.h());
        let w = code.encode(&[1, 0, 1, 1]).unwrap();
        let out = dec.decode(&strong(&w), DEFAULT_MAX_ITERS).unwrap();
        assert_eq!(out, DecodeOutput { bits: w, converged: true, iterations: 1 });
    }

    #[test]
    fn single_flip_matches_ml() {
        let code = LdpcCode::from_alist(TOY_ALIST).unwrap();
        let dec = BpDecoder::new(code.h());
        let codewords: Vec<Vec<u8>> = (0u8..16)
            .map(|v| code.encode(&(0..4).map(|i| (v >> i) & 1).collect::<Vec<_>>()).unwrap())
            .collect();
        let w = &codewords[5];
        for flip in 0..8 {
            let mut llr = strong(w);
            llr[flip] = -llr[flip] * 0.5;
            // Maximum-likelihood by enumeration: maximize correlation with the LLRs.
            let score = |c: &Vec<u8>| -> f64 {
                c.iter().zip(&llr).map(|(&b, &l)| if b == 0 { l } else { -l }).sum()
            };
            let ml = codewords.iter().max_by(|a, b| score(a).total_cmp(&score(b))).unwrap();
            let out = dec.decode(&llr, DEFAULT_MAX_ITERS).unwrap();
            assert!(out.converged);
            assert_eq!(&out.bits, ml);
            assert_eq!(&out.bits, w);
        }
    }

    #[test]
    fn converged_output_always_satisfies_checks() {
        let code = LdpcCode::from_alist(TOY_ALIST).unwrap();
        let dec = BpDecoder::new(code.h());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let llr: Vec<f64> = (0..8).map(|_| rng.random_range(-4.0..4.0)).collect();
            let out = dec.decode(&llr, 20).unwrap();
            if out.converged {
                assert!(code.h().syndrome_ok(&out.bits));
            }
        }
    }

    #[test]
    fn first_check_message_signs_are_scale_invariant() {
        let code = LdpcCode::from_alist(TOY_ALIST).unwrap();
        let dec = BpDecoder::new(code.h());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let llr: Vec<f64> = (0..8).map(|_| rng.random_range(-3.0..3.0)).collect();
            let alpha = rng.random_range(0.1..5.0);
            let scaled: Vec<f64> = llr.iter().map(|l| l * alpha).collect();
            let a = dec.first_check_messages(&llr).unwrap();
            let b = dec.first_check_messages(&scaled).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x.signum(), y.signum());
            }
        }
    }

    #[test]
    fn wrong_length_rejected() {
        let code = LdpcCode::from_alist(TOY_ALIST).unwrap();
        assert!(BpDecoder::new(code.h()).decode(&[1.0; 7], 5).is_err());
    }
}
