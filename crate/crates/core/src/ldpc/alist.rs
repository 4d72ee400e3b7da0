//! MacKay alist text format.
//!
//! ```text
//! n m
//! max_col_degree max_row_degree
//! <n column degrees>
//! <m row degrees>
//! <n lines: 1-based row indices of each column>
//! <m lines: 1-based column indices of each row>
//! ```
//! Zero entries (padding used by some writers) are ignored on input.

use std::fmt::Write;

use super::matrix::ParityMatrix;
use crate::error::{Error, Result};

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_numbers(&mut self, what: &str) -> Result<Vec<usize>> {
        loop {
            let Some((i, text)) = self.inner.next() else {
                return Err(err(self.line + 1, format!("unexpected end of file, expected {what}")));
            };
            self.line = i + 1;
            if text.trim().is_empty() {
                continue;
            }
            return text
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| err(self.line, format!("`{t}` is not a non-negative integer"))))
                .collect();
        }
    }
}

pub fn load_alist(text: &str) -> Result<ParityMatrix> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let header = lines.next_numbers("`n m`")?;
    let [n, m] = header[..] else {
        return Err(err(lines.line, "first line must be `n m`"));
    };
    if n == 0 || m == 0 {
        return Err(err(lines.line, "n and m must be positive"));
    }
    let maxes = lines.next_numbers("maximum degrees")?;
    let [max_col, max_row] = maxes[..] else {
        return Err(err(lines.line, "second line must hold two maximum degrees"));
    };
    let col_deg = lines.next_numbers("column degrees")?;
    if col_deg.len() != n {
        return Err(err(lines.line, format!("expected {n} column degrees, found {}", col_deg.len())));
    }
    if col_deg.iter().any(|&d| d > max_col) {
        return Err(err(lines.line, "column degree exceeds the declared maximum"));
    }
    let row_deg = lines.next_numbers("row degrees")?;
    if row_deg.len() != m {
        return Err(err(lines.line, format!("expected {m} row degrees, found {}", row_deg.len())));
    }
    if row_deg.iter().any(|&d| d > max_row) {
        return Err(err(lines.line, "row degree exceeds the declared maximum"));
    }

    let mut col_lists = Vec::with_capacity(n);
    for (c, &deg) in col_deg.iter().enumerate() {
        let entries: Vec<usize> = lines.next_numbers("column list")?.into_iter().filter(|&v| v != 0).collect();
        if entries.len() != deg {
            return Err(err(lines.line, format!("column {}: expected {deg} entries, found {}", c + 1, entries.len())));
        }
        if let Some(bad) = entries.iter().find(|&&r| r > m) {
            return Err(err(lines.line, format!("column {}: row index {bad} out of range 1..={m}", c + 1)));
        }
        col_lists.push(entries);
    }
    let mut rows = Vec::with_capacity(m);
    for (r, &deg) in row_deg.iter().enumerate() {
        let entries: Vec<usize> = lines.next_numbers("row list")?.into_iter().filter(|&v| v != 0).collect();
        if entries.len() != deg {
            return Err(err(lines.line, format!("row {}: expected {deg} entries, found {}", r + 1, entries.len())));
        }
        if let Some(bad) = entries.iter().find(|&&c| c > n) {
            return Err(err(lines.line, format!("row {}: column index {bad} out of range 1..={n}", r + 1)));
        }
        rows.push(entries.into_iter().map(|c| c - 1).collect::<Vec<_>>());
    }

    let h = ParityMatrix::from_rows(n, rows).map_err(|e| err(lines.line, e.to_string()))?;
    for (c, list) in col_lists.iter().enumerate() {
        let mut declared: Vec<usize> = list.iter().map(|r| r - 1).collect();
        declared.sort_unstable();
        let mut actual = h.cols()[c].clone();
        actual.sort_unstable();
        if declared != actual {
            return Err(err(0, format!("column {} list disagrees with the row lists", c + 1)));
        }
    }
    Ok(h)
}

pub fn write_alist(h: &ParityMatrix) -> String {
    let join = |v: &mut dyn Iterator<Item = usize>| v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    let max_col = h.cols().iter().map(Vec::len).max().unwrap_or(0);
    let max_row = h.rows().iter().map(Vec::len).max().unwrap_or(0);
    writeln!(out, "{} {}", h.n(), h.m()).unwrap();
    writeln!(out, "{max_col} {max_row}").unwrap();
    writeln!(out, "{}", join(&mut h.cols().iter().map(Vec::len))).unwrap();
    writeln!(out, "{}", join(&mut h.rows().iter().map(Vec::len))).unwrap();
    for col in h.cols() {
        writeln!(out, "{}", join(&mut col.iter().map(|r| r + 1))).unwrap();
    }
    for row in h.rows() {
        writeln!(out, "{}", join(&mut row.iter().map(|c| c + 1))).unwrap();
    }
    out
}
