//! Minimal SVG charts: a two-colour scatter and a log-log line chart.

use std::fmt::Write as _;

use gmrf_core::sampler::SampleBatch;
use gmrf_core::study::ConvergenceRecord;

pub const VALID_COLOR: &str = "#1f77b4";
pub const DD_COLOR: &str = "#ff7f0e";

const SIZE: f64 = 480.0;
const PAD: f64 = 48.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (SIZE - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        SIZE - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (SIZE - 2.0 * PAD)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (PAD, SIZE - PAD, PAD, SIZE - PAD);
        let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
        for (v, anchor) in [(self.x.0, "start"), (self.x.1, "end")] {
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="{anchor}">{}</text>"#, self.px(v), b + 14.0, fmt_tick(v));
        }
        for v in [self.y.0, self.y.1] {
            let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#, l - 4.0, self.py(v) + 4.0, fmt_tick(v));
        }
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{xlabel}</text>"#, SIZE / 2.0, SIZE - 10.0);
        let _ = writeln!(
            out,
            r#"<text x="14" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 14 {:.1})">{ylabel}</text>"#,
            SIZE / 2.0,
            SIZE / 2.0
        );
    }
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn open() -> String {
    format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#) + "\n"
        + &format!(r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#)
        + "\n"
}

/// Accepted `(rho12, rho21)` pairs; diagonally dominant ones drawn on top.
pub fn slice_scatter(batch: &SampleBatch) -> String {
    let frame = Frame { x: (-1.0, 1.0), y: (-1.0, 1.0) };
    let mut out = open();
    frame.axes(&mut out, "rho12", "rho21");
    for dd in [false, true] {
        let color = if dd { DD_COLOR } else { VALID_COLOR };
        for d in batch.accepted_draws().filter(|d| d.dd_valid == dd) {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{color}"/>"#,
                frame.px(d.theta.rho12),
                frame.py(d.theta.rho21)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// `log10(field)` against `log10(n1 n2)`, one polyline per parameter.
pub fn loglog_chart(records: &[ConvergenceRecord], field: impl Fn(&ConvergenceRecord) -> f64, ylabel: &str) -> String {
    let pts: Vec<(usize, f64, f64)> = records
        .iter()
        .filter(|r| field(r) > 0.0)
        .map(|r| (r.theta_idx, (r.dims.n() as f64).log10(), field(r).log10()))
        .collect();
    let mut out = open();
    if pts.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let span = |sel: fn(&(usize, f64, f64)) -> f64| {
        let lo = pts.iter().map(sel).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(sel).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) }
    };
    let frame = Frame { x: span(|p| p.1), y: span(|p| p.2) };
    frame.axes(&mut out, "log10(n1 n2)", ylabel);
    let ids: std::collections::BTreeSet<usize> = pts.iter().map(|p| p.0).collect();
    for (k, id) in ids.iter().enumerate() {
        let hue = (k * 137) % 360;
        let line: Vec<String> = pts
            .iter()
            .filter(|p| p.0 == *id)
            .map(|p| format!("{:.2},{:.2}", frame.px(p.1), frame.py(p.2)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="hsl({hue},70%,40%)" stroke-width="1"/>"#,
            line.join(" ")
        );
    }
    out.push_str("</svg>\n");
    out
}
