//! Static SVG rendering of BER curves and constellations.

use std::fmt::Write as _;

use num_complex::Complex64;

use convphy::{Error, Result};

use crate::sweep::BerRecord;

/// BER values of zero are drawn as down-arrows at this floor.
pub const BER_FLOOR: f64 = 1e-7;
/// Constellations with more points than this are thinned before drawing.
pub const MAX_MARKERS: usize = 100_000;

const W: f64 = 640.0;
const H: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// One polyline per series on a log-y axis, with a legend.
pub fn ber_svg(series: &[(String, Vec<BerRecord>)]) -> Result<String> {
    if series.is_empty() || series.iter().any(|(_, r)| r.is_empty()) {
        return Err(Error::InvalidArgument("every BER series needs at least one record".into()));
    }
    let all = series.iter().flat_map(|(_, r)| r.iter());
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut lo = 1.0f64;
    for r in all {
        x0 = x0.min(r.snr_db);
        x1 = x1.max(r.snr_db);
        if r.ber > 0.0 {
            lo = lo.min(r.ber);
        }
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let ymin = (lo.max(BER_FLOOR).log10().floor()).min(-1.0);
    let ymax = 0.0;
    let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
    let py = |b: f64| {
        let l = b.max(BER_FLOOR).log10().clamp(ymin, ymax);
        TOP + (ymax - l) / (ymax - ymin) * (H - TOP - BOTTOM)
    };

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (bx0, bx1, by0, by1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    writeln!(s, r#"<rect x="{bx0}" y="{by0}" width="{}" height="{}" fill="none" stroke="black"/>"#, bx1 - bx0, by1 - by0).unwrap();
    for d in (ymin as i32)..=(ymax as i32) {
        let y = py(10f64.powi(d));
        writeln!(s, r##"<line x1="{bx0}" y1="{y:.2}" x2="{bx1}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"##, bx0 - 6.0, y + 4.0).unwrap();
    }
    let ticks = 6;
    for i in 0..=ticks {
        let x = x0 + (x1 - x0) * i as f64 / ticks as f64;
        writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{:.1}</text>"#, px(x), by1 + 18.0, x).unwrap();
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">SNR (dB, Es/N0)</text>"#, (bx0 + bx1) / 2.0, H - 10.0).unwrap();
    writeln!(s, r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">BER</text>"#, (by0 + by1) / 2.0, (by0 + by1) / 2.0).unwrap();

    for (i, (name, recs)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let pts: Vec<String> = recs.iter().map(|r| format!("{:.2},{:.2}", px(r.snr_db), py(r.ber))).collect();
        writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, pts.join(" ")).unwrap();
        for r in recs {
            let (x, y) = (px(r.snr_db), py(r.ber));
            if r.ber > 0.0 {
                writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#).unwrap();
            } else {
                // Zero BER cannot sit on a log axis; mark it at the floor.
                writeln!(s, r#"<path class="zero-ber" d="M{:.2},{:.2} L{:.2},{:.2} L{x:.2},{:.2} Z" fill="{color}"/>"#, x - 5.0, y - 8.0, x + 5.0, y - 8.0, y).unwrap();
            }
        }
        let ly = TOP + 20.0 + 20.0 * i as f64;
        writeln!(
            s,
            r#"<g class="legend"><line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text></g>"#,
            W - RIGHT + 12.0,
            W - RIGHT + 36.0,
            W - RIGHT + 42.0,
            ly + 4.0,
            escape(name)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Scatter of constellation points with a unit-circle guide.
pub fn constellation_svg(points: &[Complex64]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("constellation is empty".into()));
    }
    let stride = points.len().div_ceil(MAX_MARKERS);
    let r = points.iter().map(|p| p.norm()).fold(1.0f64, f64::max) * 1.1;
    let size = 480.0;
    let c = size / 2.0;
    let scale = (size / 2.0 - 20.0) / r;
    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="12">"#).unwrap();
    writeln!(s, r##"<rect width="100%" height="100%" fill="white"/><line x1="0" y1="{c}" x2="{size}" y2="{c}" stroke="#ccc"/><line x1="{c}" y1="0" x2="{c}" y2="{size}" stroke="#ccc"/>"##).unwrap();
    writeln!(s, r##"<circle class="unit-circle" cx="{c}" cy="{c}" r="{:.2}" fill="none" stroke="#888" stroke-dasharray="4 3"/>"##, scale).unwrap();
    if stride > 1 {
        writeln!(s, r#"<text x="8" y="16">showing every {stride}th of {} points</text>"#, points.len()).unwrap();
    }
    for p in points.iter().step_by(stride) {
        writeln!(s, r##"<circle class="pt" cx="{:.2}" cy="{:.2}" r="1.2" fill="#1f77b4"/>"##, c + p.re * scale, c - p.im * scale).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}
