//! File formats: CSV tables, JSON verdicts and MatrixMarket matrices.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use gmrf_core::sampler::{Draw, SampleBatch};
use gmrf_core::spectrum::SpectrumRow;
use gmrf_core::study::{ConvergenceRecord, Field, SlopeFit};
use gmrf_core::{SparseSymMatrix, ValidityVerdict};
use serde_json::{json, Value};

use crate::bench::BenchRow;

pub const SPECTRUM_HEADER: [&str; 8] = ["i", "j", "lam11", "lam22", "re_lam12", "im_lam12", "lam_minus", "lam_plus"];
pub const BATCH_HEADER: [&str; 9] = ["idx", "phi", "rho11", "rho12", "rho21", "rho22", "valid", "dd_valid", "min_eig"];
pub const STUDY_HEADER: [&str; 10] = ["theta_idx", "n1", "n2", "parity1", "parity2", "lam_q", "lam_qt", "c_theta", "eps", "delta"];
pub const FIT_HEADER: [&str; 6] = ["theta_idx", "field", "slope", "intercept", "r2", "n_points"];
pub const BENCH_HEADER: [&str; 6] = ["n1", "n2", "case", "method", "median_ns", "ratio"];

/// Opens `path` for writing, or stdout when it is `None`.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn to_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

fn table<W: Write, R: AsRef<[String]>>(w: W, header: &[&str], rows: impl IntoIterator<Item = R>) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header).map_err(to_io)?;
    for r in rows {
        out.write_record(r.as_ref()).map_err(to_io)?;
    }
    out.flush()
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

pub fn write_spectrum_csv<W: Write>(w: W, rows: &[SpectrumRow]) -> io::Result<()> {
    table(
        w,
        &SPECTRUM_HEADER,
        rows.iter().map(|r| {
            vec![s(r.i), s(r.j), s(r.lam11), s(r.lam22), s(r.lam12.re), s(r.lam12.im), s(r.lam_minus), s(r.lam_plus)]
        }),
    )
}

fn draw_row(d: &Draw) -> Vec<String> {
    let t = d.theta;
    vec![
        s(d.idx),
        s(t.phi),
        s(t.rho11),
        s(t.rho12),
        s(t.rho21),
        s(t.rho22),
        s(d.valid.as_str()),
        s(d.dd_valid),
        s(d.min_eig),
    ]
}

pub fn write_batch_csv<W: Write>(w: W, batch: &SampleBatch) -> io::Result<()> {
    table(w, &BATCH_HEADER, batch.draws.iter().map(draw_row))
}

pub fn write_study_csv<W: Write>(w: W, records: &[ConvergenceRecord]) -> io::Result<()> {
    table(
        w,
        &STUDY_HEADER,
        records.iter().map(|r| {
            let (p1, p2) = r.parity();
            vec![
                s(r.theta_idx),
                s(r.dims.n1()),
                s(r.dims.n2()),
                s(p1),
                s(p2),
                s(r.lam_q),
                s(r.lam_qt),
                s(r.c_theta),
                s(r.eps),
                s(r.delta),
            ]
        }),
    )
}

pub fn write_fit_csv<W: Write>(w: W, fits: &[(usize, Field, SlopeFit)]) -> io::Result<()> {
    table(
        w,
        &FIT_HEADER,
        fits.iter().map(|(k, field, f)| vec![s(k), s(field.name()), s(f.slope), s(f.intercept), s(f.r_squared), s(f.n_points)]),
    )
}

pub fn write_bench_csv<W: Write>(w: W, rows: &[BenchRow]) -> io::Result<()> {
    table(
        w,
        &BENCH_HEADER,
        rows.iter().map(|r| {
            vec![s(r.dims.n1()), s(r.dims.n2()), s(r.case.name()), s(r.method.name()), s(r.median_ns), s(r.ratio)]
        }),
    )
}

/// The verdict as a JSON object.
pub fn verdict_json(v: &ValidityVerdict) -> Value {
    let t = v.theta;
    json!({
        "method": v.method.name(),
        "valid": v.valid.as_str(),
        "min_eig": v.min_eig_evidence,
        "n1": v.dims.map(|d| d.n1()),
        "n2": v.dims.map(|d| d.n2()),
        "theta": {"phi": t.phi, "rho11": t.rho11, "rho12": t.rho12, "rho21": t.rho21, "rho22": t.rho22},
        "elapsed_ns": v.elapsed.as_nanos() as u64,
    })
}

/// Writes the full matrix in MatrixMarket symmetric coordinate format
/// (lower triangle, one-based).
pub fn write_matrix_market<W: Write>(mut w: W, m: &SparseSymMatrix) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", m.dim(), m.dim(), m.stored_len())?;
    let mut lower: Vec<(usize, usize, f64)> = m.entries().iter().map(|&(r, c, v)| (c, r, v)).collect();
    lower.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    for (r, c, v) in lower {
        writeln!(w, "{} {} {:e}", r + 1, c + 1, v)?;
    }
    w.flush()
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

/// Reads a real symmetric (or general, folded) coordinate MatrixMarket file.
pub fn read_matrix_market<R: io::Read>(r: R) -> io::Result<SparseSymMatrix> {
    let mut lines = BufReader::new(r).lines();
    let banner = lines.next().ok_or_else(|| bad("empty file"))??;
    let lower = banner.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(bad(format!("unsupported banner: {banner}")));
    }
    let symmetric = lower.split_whitespace().last() == Some("symmetric");
    let mut size = None;
    let mut triplets = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if size.is_none() {
            let dims: Vec<usize> = f.iter().map(|x| x.parse().map_err(|_| bad("bad size line"))).collect::<io::Result<_>>()?;
            if dims.len() != 3 || dims[0] != dims[1] {
                return Err(bad("expected a square size line"));
            }
            size = Some(dims[0]);
            continue;
        }
        if f.len() != 3 {
            return Err(bad(format!("bad entry line: {t}")));
        }
        let r: usize = f[0].parse().map_err(|_| bad("bad row"))?;
        let c: usize = f[1].parse().map_err(|_| bad("bad column"))?;
        let v: f64 = f[2].parse().map_err(|_| bad("bad value"))?;
        if r == 0 || c == 0 {
            return Err(bad("indices are one-based"));
        }
        // General files list both triangles; keep only one of each pair.
        if symmetric || r >= c {
            triplets.push((r - 1, c - 1, v));
        }
    }
    let n = size.ok_or_else(|| bad("missing size line"))?;
    SparseSymMatrix::from_triplets(n, triplets).map_err(|e| bad(e.to_string()))
}

pub fn read_matrix_market_file(path: &Path) -> io::Result<SparseSymMatrix> {
    read_matrix_market(File::open(path)?)
}
