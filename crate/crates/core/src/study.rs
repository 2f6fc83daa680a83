//! Convergence of `lambda_min(Q~)` and `lambda_min(Q)` towards `C(theta)`.
//!
//! For each parameter and lattice the sweep records
//! `eps = |lambda_min(Q~) - lambda_min(Q)|` and
//! `delta = |lambda_min(Q) - C(theta)|`, both expected to decay like
//! `1 / (n1 n2)`. The per-pair work is exposed separately so that callers can
//! schedule it in parallel.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{log10, sqrt};
use crate::oracle::{lanczos_extreme, LanczosConfig, Which};
use crate::params::{GridDims, Theta};
use crate::precision::build_inner_precision;
use crate::sampler::{propose_chunk, SampleBox};
use crate::spectrum::{lattice_min_eig, limit_constant, min_eig_perturbed, transect_eigs, LatticeKind, Scan};
use crate::validity::{limit_check, Validity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRecord {
    pub theta_idx: usize,
    pub theta: Theta,
    pub dims: GridDims,
    /// `lambda_min(Q)` from the oracle.
    pub lam_q: f64,
    /// `lambda_min(Q~)` from the closed form.
    pub lam_qt: f64,
    pub c_theta: f64,
    pub eps: f64,
    pub delta: f64,
    pub iterations: usize,
}

impl ConvergenceRecord {
    pub fn parity(&self) -> (u8, u8) {
        self.dims.parity()
    }
}

/// One point of the sweep; `c_theta` is computed once per parameter.
pub fn convergence_record(
    theta_idx: usize,
    theta: &Theta,
    c_theta: f64,
    dims: GridDims,
    cfg: &LanczosConfig,
) -> Result<ConvergenceRecord> {
    let q = build_inner_precision(theta, dims)?;
    let r = lanczos_extreme(&q, cfg, Which::Smallest)?;
    let lam_qt = min_eig_perturbed(theta, dims, Scan::Reduced);
    Ok(ConvergenceRecord {
        theta_idx,
        theta: *theta,
        dims,
        lam_q: r.value,
        lam_qt,
        c_theta,
        eps: (lam_qt - r.value).abs(),
        delta: (r.value - c_theta).abs(),
        iterations: r.iterations,
    })
}

/// A `(theta, grid)` pair the oracle could not resolve.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSkip {
    pub theta_idx: usize,
    pub dims: GridDims,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    /// Ordered by `(theta_idx, position of the grid in the input)`.
    pub records: Vec<ConvergenceRecord>,
    pub skips: Vec<SweepSkip>,
}

impl SweepReport {
    pub fn for_theta(&self, theta_idx: usize) -> impl Iterator<Item = &ConvergenceRecord> {
        self.records.iter().filter(move |r| r.theta_idx == theta_idx)
    }
}

/// Sequential sweep over every `(theta, grid)` pair.
///
/// Oracle failures become [`SweepSkip`]s; only invalid input fails the call.
pub fn convergence_sweep(
    thetas: &[Theta],
    grids: &[GridDims],
    cfg: &LanczosConfig,
    limit_tol: f64,
) -> Result<SweepReport> {
    if grids.is_empty() {
        return Err(Error::InvalidConfig("grid list is empty"));
    }
    let mut report = SweepReport::default();
    for (k, theta) in thetas.iter().enumerate() {
        let c = limit_constant(theta, limit_tol)?.value;
        for &dims in grids {
            match convergence_record(k, theta, c, dims, cfg) {
                Ok(r) => report.records.push(r),
                Err(e @ Error::NotConverged { .. }) => report.skips.push(SweepSkip {
                    theta_idx: k,
                    dims,
                    error: e,
                }),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(report)
}

/// Ordinary least-squares line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    /// Points dropped because the fitted quantity was not strictly positive.
    pub excluded: usize,
}

/// Fits `y = slope x + intercept`; needs at least three points.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::TooFewPoints { usable: n, excluded: 0 });
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("fit abscissae are all equal"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
        n_points: n,
        excluded: 0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Eps,
    Delta,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Eps => "eps",
            Field::Delta => "delta",
        }
    }

    pub fn of(self, r: &ConvergenceRecord) -> f64 {
        match self {
            Field::Eps => r.eps,
            Field::Delta => r.delta,
        }
    }
}

/// Fits `log10(field)` against `log10(n1 n2)`, excluding non-positive values.
pub fn fit_loglog<'a, I>(records: I, field: Field) -> Result<SlopeFit>
where
    I: IntoIterator<Item = &'a ConvergenceRecord>,
{
    let (mut xs, mut ys, mut excluded) = (Vec::new(), Vec::new(), 0);
    for r in records {
        let v = field.of(r);
        if v > 0.0 && v.is_finite() {
            xs.push(log10(r.dims.n() as f64));
            ys.push(log10(v));
        } else {
            excluded += 1;
        }
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints {
            usable: xs.len(),
            excluded,
        });
    }
    let mut fit = fit_line(&xs, &ys)?;
    fit.excluded = excluded;
    Ok(fit)
}

/// Same fit on raw `(size, value)` pairs, for the univariate proxies.
pub fn fit_loglog_points(sizes: &[f64], values: &[f64]) -> Result<SlopeFit> {
    let (mut xs, mut ys, mut excluded) = (Vec::new(), Vec::new(), 0);
    for (&s, &v) in sizes.iter().zip(values) {
        if v > 0.0 && s > 0.0 {
            xs.push(log10(s));
            ys.push(log10(v));
        } else {
            excluded += 1;
        }
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints {
            usable: xs.len(),
            excluded,
        });
    }
    let mut fit = fit_line(&xs, &ys)?;
    fit.excluded = excluded;
    Ok(fit)
}

/// Records of one parameter split by lattice parity, plus the grids where
/// `lambda_min(Q~) - lambda_min(Q)` changes sign.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParityReport {
    /// `(parity, records)` for each class present, in the order
    /// even-even, even-odd, odd-even, odd-odd.
    pub classes: Vec<((u8, u8), Vec<ConvergenceRecord>)>,
    /// Consecutive grids (within one parity class) between which the sign flips.
    pub sign_changes: Vec<(GridDims, GridDims)>,
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Groups records (already ordered by grid) by parity and traces sign flips.
pub fn analyze_parity(records: &[ConvergenceRecord]) -> ParityReport {
    let mut report = ParityReport::default();
    for parity in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let class: Vec<ConvergenceRecord> = records.iter().filter(|r| r.parity() == parity).copied().collect();
        for w in class.windows(2) {
            let (a, b) = (sign(w[0].lam_qt - w[0].lam_q), sign(w[1].lam_qt - w[1].lam_q));
            if a != b {
                report.sign_changes.push((w[0].dims, w[1].dims));
            }
        }
        if !class.is_empty() {
            report.classes.push((parity, class));
        }
    }
    report
}

/// Runs one parameter over `grids` and analyses the parity pattern.
pub fn parity_patterns(theta: &Theta, grids: &[GridDims], cfg: &LanczosConfig, limit_tol: f64) -> Result<(SweepReport, ParityReport)> {
    let sweep = convergence_sweep(core::slice::from_ref(theta), grids, cfg, limit_tol)?;
    let parity = analyze_parity(&sweep.records);
    Ok((sweep, parity))
}

/// Draws `count` parameters uniformly from `[-1, 1]^5` conditioned on
/// `limit_check` being valid, so `lambda_min` stays positive on every grid.
///
/// Candidates must first pass the closed-form test on a `probe` lattice,
/// which is necessary for `C(theta) > 0` and much cheaper.
pub fn select_study_thetas(count: usize, seed: u64, probe: GridDims, limit_tol: f64) -> Result<Vec<Theta>> {
    let bounds = SampleBox::default();
    let mut out = Vec::with_capacity(count);
    let mut chunk = 0;
    while out.len() < count {
        for (_, theta) in propose_chunk(seed, chunk, &bounds) {
            if min_eig_perturbed(&theta, probe, Scan::Reduced) <= limit_tol {
                continue;
            }
            if limit_check(&theta, limit_tol)?.valid == Validity::Valid {
                out.push(theta);
                if out.len() == count {
                    break;
                }
            }
        }
        chunk += 1;
        if chunk > 1 << 20 {
            return Err(Error::InvalidConfig("no admissible parameter found"));
        }
    }
    Ok(out)
}

/// `|lambda_min(tridiag) - lambda_min(circ)|` for the transect of length `n`.
pub fn transect_eps(rho: f64, n: usize) -> Result<f64> {
    Ok((transect_eigs(rho, n, LatticeKind::Toeplitz)? - transect_eigs(rho, n, LatticeKind::Circulant)?).abs())
}

/// `|lambda_min(T) - lambda_min(C)|` for `T(rho, 1, rho)` on `dims`.
pub fn lattice_eps(rho: f64, dims: GridDims) -> f64 {
    (lattice_min_eig(rho, dims, LatticeKind::Toeplitz) - lattice_min_eig(rho, dims, LatticeKind::Circulant)).abs()
}

/// Linear-interpolation quantile of sorted data, `p` in `[0, 1]`.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, sqrt(var))
}
