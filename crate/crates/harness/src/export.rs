//! CSV and metadata emission.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use convphy::{Error, Result};

use crate::sweep::BerRecord;

pub const BER_HEADER: &str = "snr_db,bits,errors,ber,seconds";

/// `snr_db,bits,errors,ber,seconds` rows; floats use the shortest exact representation.
pub fn ber_csv(records: &[BerRecord]) -> String {
    let mut s = String::from(BER_HEADER);
    s.push('\n');
    for r in records {
        writeln!(s, "{},{},{},{},{}", r.snr_db, r.bits, r.errors, r.ber, r.seconds).expect("string write");
    }
    s
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn field<T: std::str::FromStr>(cols: &[&str], i: usize, line: usize) -> Result<T> {
    cols.get(i)
        .and_then(|c| c.trim().parse().ok())
        .ok_or_else(|| parse_err(line, format!("column {} is missing or malformed", i + 1)))
}

pub fn parse_ber_csv(text: &str) -> Result<Vec<BerRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == BER_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header `{BER_HEADER}`"))),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let cols: Vec<&str> = l.split(',').collect();
            let line = i + 1;
            if cols.len() != 5 {
                return Err(parse_err(line, format!("expected 5 columns, found {}", cols.len())));
            }
            Ok(BerRecord {
                snr_db: field(&cols, 0, line)?,
                bits: field(&cols, 1, line)?,
                errors: field(&cols, 2, line)?,
                ber: field(&cols, 3, line)?,
                seconds: field(&cols, 4, line)?,
            })
        })
        .collect()
}

pub fn constellation_csv(points: &[Complex64]) -> String {
    let mut s = String::with_capacity(points.len() * 40 + 4);
    s.push_str("i,q\n");
    for p in points {
        writeln!(s, "{},{}", p.re, p.im).expect("string write");
    }
    s
}

pub fn parse_constellation_csv(text: &str) -> Result<Vec<Complex64>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "i,q" => {}
        _ => return Err(parse_err(1, "expected header `i,q`")),
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let cols: Vec<&str> = l.split(',').collect();
            Ok(Complex64::new(field(&cols, 0, i + 1)?, field(&cols, 1, i + 1)?))
        })
        .collect()
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}
