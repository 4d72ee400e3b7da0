//! Progressive edge-growth construction of regular parity-check matrices.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::code::LdpcCode;
use super::matrix::ParityMatrix;
use crate::error::{invalid, Result};

/// Seed that regenerates the shipped default alist.
pub const DEFAULT_SEED: u64 = 2018;

/// Builds an `m × n` matrix with `col_degree` ones per column and
/// `n·col_degree/m` per row. Each new edge goes to a check at maximal
/// graph distance from the variable, ties broken by current check degree and then
/// the seeded RNG.
pub fn peg_regular(n: usize, m: usize, col_degree: usize, seed: u64) -> Result<ParityMatrix> {
    if m == 0 || n == 0 || col_degree == 0 || (n * col_degree) % m != 0 || col_degree > m {
        return invalid(format!("no regular ({col_degree}, ?) graph with n = {n}, m = {m}"));
    }
    let row_degree = n * col_degree / m;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut col_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut row_adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut seen_check = vec![usize::MAX; m];
    let mut seen_var = vec![usize::MAX; n];
    let mut stamp = 0usize;

    for v in 0..n {
        for t in 0..col_degree {
            let open = |c: usize, row_adj: &[Vec<usize>], col_adj: &[Vec<usize>]| {
                row_adj[c].len() < row_degree && !col_adj[v].contains(&c)
            };
            let candidates: Vec<usize> = if t == 0 {
                (0..m).filter(|&c| open(c, &row_adj, &col_adj)).collect()
            } else {
                stamp += 1;
                // Breadth-first expansion; track the checks reached at each depth.
                let mut frontier = VecDeque::from([v]);
                seen_var[v] = stamp;
                let mut reached = 0;
                let mut previous: Vec<usize> = Vec::new();
                loop {
                    let mut level = Vec::new();
                    let mut next = VecDeque::new();
                    while let Some(u) = frontier.pop_front() {
                        for &c in &col_adj[u] {
                            if seen_check[c] != stamp {
                                seen_check[c] = stamp;
                                level.push(c);
                                for &w in &row_adj[c] {
                                    if seen_var[w] != stamp {
                                        seen_var[w] = stamp;
                                        next.push_back(w);
                                    }
                                }
                            }
                        }
                    }
                    reached += level.len();
                    let unreached: Vec<usize> = (0..m)
                        .filter(|&c| seen_check[c] != stamp && open(c, &row_adj, &col_adj))
                        .collect();
                    if level.is_empty() || reached == m || unreached.is_empty() {
                        if !unreached.is_empty() {
                            break unreached;
                        }
                        // Every open check is already close; take the deepest ones.
                        let deepest: Vec<usize> =
                            level.into_iter().filter(|&c| open(c, &row_adj, &col_adj)).collect();
                        let fallback: Vec<usize> = if deepest.is_empty() {
                            previous.into_iter().filter(|&c| open(c, &row_adj, &col_adj)).collect()
                        } else {
                            deepest
                        };
                        if fallback.is_empty() {
                            break (0..m).filter(|&c| open(c, &row_adj, &col_adj)).collect();
                        }
                        break fallback;
                    }
                    previous = level;
                    frontier = next;
                }
            };
            let Some(min_deg) = candidates.iter().map(|&c| row_adj[c].len()).min() else {
                return invalid(format!("edge growth stalled at variable {v}"));
            };
            let lightest: Vec<usize> = candidates.into_iter().filter(|&c| row_adj[c].len() == min_deg).collect();
            let c = lightest[rng.random_range(0..lightest.len())];
            col_adj[v].push(c);
            row_adj[c].push(v);
        }
    }
    for row in &mut row_adj {
        row.sort_unstable();
    }
    ParityMatrix::from_rows(n, row_adj)
}

/// Draws seeds `seed, seed + 1, …` until the matrix has full rank.
pub fn peg_full_rank(n: usize, m: usize, col_degree: usize, seed: u64, attempts: usize) -> Result<(ParityMatrix, u64)> {
    let mut last = None;
    for s in seed..seed + attempts as u64 {
        let h = peg_regular(n, m, col_degree, s)?;
        match LdpcCode::new(h.clone()) {
            Ok(_) => return Ok((h, s)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| crate::error::Error::InvalidArgument("zero attempts".into())))
}
