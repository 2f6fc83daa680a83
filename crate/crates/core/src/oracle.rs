//! Ground-truth extreme eigenvalues.
//!
//! Small matrices go through a dense symmetric eigensolver. Large sparse ones
//! use Lanczos with full reorthogonalisation on the Gershgorin-shifted
//! operator `sigma I - M`, so no factorisation is ever needed.

use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::sparse::{SparseMatrix, SparseSymMatrix};

/// Largest dimension accepted by the dense solvers.
pub const DENSE_CAP: usize = 2000;

/// `y = M v`, with each stored off-diagonal entry applied on both sides.
pub fn matvec(m: &SparseSymMatrix, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            found: v.len(),
        });
    }
    let mut y = alloc::vec![0.0; v.len()];
    matvec_into(m, v, &mut y);
    Ok(y)
}

fn matvec_into(m: &SparseSymMatrix, v: &[f64], y: &mut [f64]) {
    y.iter_mut().for_each(|e| *e = 0.0);
    for &(r, c, a) in m.entries() {
        y[r] += a * v[c];
        if r != c {
            y[c] += a * v[r];
        }
    }
}

/// `max_i (m_ii + sum_{j != i} |m_ij|)`, an upper bound on `lambda_max`.
pub fn gershgorin_upper(m: &SparseSymMatrix) -> f64 {
    m.row_abs_sums()
        .iter()
        .fold(f64::NEG_INFINITY, |acc, &(d, off)| acc.max(d + off))
}

/// `min_i (m_ii - sum_{j != i} |m_ij|)`, a lower bound on `lambda_min`.
pub fn gershgorin_lower(m: &SparseSymMatrix) -> f64 {
    m.row_abs_sums()
        .iter()
        .fold(f64::INFINITY, |acc, &(d, off)| acc.min(d - off))
}

/// Settings for [`lanczos_extreme`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosConfig {
    pub max_iter: usize,
    /// Absolute bound on `||M v - lambda v||` for a unit Ritz vector.
    pub conv_tol: f64,
    pub reorthogonalize: bool,
    /// Seed of the Gaussian starting vector.
    pub seed: u64,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        LanczosConfig {
            max_iter: 3000,
            conv_tol: 1e-9,
            reorthogonalize: true,
            seed: 0x5eed,
        }
    }
}

impl LanczosConfig {
    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidConfig("max_iter must be at least 1"));
        }
        if !(self.conv_tol > 0.0) {
            return Err(Error::InvalidTolerance(self.conv_tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Smallest,
    Largest,
}

/// An eigenpair estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EigResult {
    pub value: f64,
    /// Unit Ritz vector.
    pub vector: Option<Vec<f64>>,
    pub iterations: usize,
    /// `||M v - value v||` for the unit vector `v`.
    pub residual: f64,
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` strictly below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for k in 0..alpha.len() {
        let b2 = if k == 0 { 0.0 } else { beta[k - 1] * beta[k - 1] };
        q = alpha[k] - x - if k == 0 { 0.0 } else { b2 / q };
        if q == 0.0 {
            q = f64::EPSILON * (x.abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of the symmetric tridiagonal matrix by bisection.
fn tridiag_max_eig(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `(T - shift I) x = b` by Gaussian elimination with partial pivoting.
fn tridiag_solve(alpha: &[f64], beta: &[f64], shift: f64, b: &mut [f64]) {
    let k = alpha.len();
    // Row i keeps columns i, i + 1 and, after a pivot, i + 2.
    let mut d: Vec<f64> = alpha.iter().map(|a| a - shift).collect();
    let mut du: Vec<f64> = (0..k).map(|i| if i + 1 < k { beta[i] } else { 0.0 }).collect();
    let mut du2 = alloc::vec![0.0; k];
    let tiny = f64::EPSILON * (d.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1.0);
    for i in 0..k.saturating_sub(1) {
        let sub = beta[i];
        if sub.abs() > d[i].abs() {
            // swap rows i and i + 1
            let f = d[i] / sub;
            let dui = du[i];
            d[i] = sub;
            du[i] = d[i + 1];
            du2[i] = if i + 2 < k { du[i + 1] } else { 0.0 };
            d[i + 1] = dui - f * du[i];
            du[i + 1] = if i + 2 < k { -f * du2[i] } else { 0.0 };
            b.swap(i, i + 1);
            b[i + 1] -= f * b[i];
        } else {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let f = sub / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
        }
    }
    if d[k - 1] == 0.0 {
        d[k - 1] = tiny;
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        if i + 1 < k {
            s -= du[i] * b[i + 1];
        }
        if i + 2 < k {
            s -= du2[i] * b[i + 2];
        }
        if d[i] == 0.0 {
            d[i] = tiny;
        }
        b[i] = s / d[i];
    }
}

/// Unit eigenvector of the tridiagonal matrix for the (accurate) eigenvalue `lam`.
fn tridiag_eigvec(alpha: &[f64], beta: &[f64], lam: f64) -> Vec<f64> {
    let k = alpha.len();
    let scale = alpha.iter().chain(beta).fold(1.0f64, |m, x| m.max(x.abs()));
    let shift = lam + 1e3 * f64::EPSILON * scale;
    let mut y = alloc::vec![1.0; k];
    for _ in 0..3 {
        tridiag_solve(alpha, beta, shift, &mut y);
        let nrm = sqrt(y.iter().map(|v| v * v).sum());
        if !(nrm > 0.0) || !nrm.is_finite() {
            y = alloc::vec![1.0 / sqrt(k as f64); k];
            break;
        }
        y.iter_mut().for_each(|v| *v /= nrm);
    }
    y
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

/// Stopping rule for the Lanczos driver.
#[derive(Debug, Clone, Copy)]
enum Stop {
    /// Run to convergence.
    Converge,
    /// Also stop once a Ritz value of `M` falls below the threshold.
    Below(f64),
}

#[derive(Debug)]
struct Outcome {
    result: EigResult,
    decided_below: bool,
}

fn lanczos_core(m: &SparseSymMatrix, cfg: &LanczosConfig, which: Which, stop: Stop) -> Result<Outcome> {
    cfg.validate()?;
    let n = m.dim();
    if n < 2 {
        return Err(Error::InvalidSize { n, min: 2 });
    }
    // Iterate on B = sigma I + sign M, whose top eigenvalue is the wanted one:
    // the smallest of M is sigma - lambda_max(sigma I - M).
    let (sigma, sign) = match which {
        Which::Smallest => (gershgorin_upper(m), -1.0),
        Which::Largest => (0.0, 1.0),
    };
    let to_m = |b: f64| sigma + sign * b;
    let apply = |v: &[f64], out: &mut [f64]| {
        matvec_into(m, v, out);
        for (o, &x) in out.iter_mut().zip(v) {
            *o = sigma * x + sign * *o;
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let max_iter = cfg.max_iter.min(n);
    let mut basis: Vec<f64> = Vec::with_capacity(n * max_iter.min(64));
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = alloc::vec![0.0; n];
    let mut prev: Vec<f64> = alloc::vec![0.0; n];
    let mut best = (f64::NAN, f64::INFINITY);
    let scale = gershgorin_upper(m).abs().max(gershgorin_lower(m).abs()).max(1.0);

    for k in 0..max_iter {
        basis.extend_from_slice(&v);
        apply(&v, &mut w);
        let a = dot(&w, &v);
        alpha.push(a);
        let b_prev = if k == 0 { 0.0 } else { beta[k - 1] };
        for i in 0..n {
            w[i] -= a * v[i] + b_prev * prev[i];
        }
        if cfg.reorthogonalize {
            // Classical Gram-Schmidt, repeated once when it removed a lot.
            for _pass in 0..2 {
                let before = norm(&w);
                for q in basis.chunks_exact(n) {
                    let h = dot(q, &w);
                    for (wi, &qi) in w.iter_mut().zip(q) {
                        *wi -= h * qi;
                    }
                }
                if norm(&w) > 0.7 * before {
                    break;
                }
            }
        }
        let b = norm(&w);
        let iterations = k + 1;
        let breakdown = b <= 1e-14 * scale;
        let check = breakdown || iterations == max_iter || iterations % 5 == 0 || iterations < 5;
        if check {
            let top = tridiag_max_eig(&alpha, &beta);
            let y = tridiag_eigvec(&alpha, &beta, top);
            let estimate = b * y[k].abs();
            let value = to_m(top);
            if matches!(stop, Stop::Below(t) if value < t) {
                return Ok(Outcome {
                    result: EigResult {
                        value,
                        vector: None,
                        iterations,
                        residual: estimate,
                    },
                    decided_below: true,
                });
            }
            if estimate <= cfg.conv_tol || breakdown || iterations == max_iter {
                let mut x = alloc::vec![0.0; n];
                for (q, &yj) in basis.chunks_exact(n).zip(&y) {
                    for (xi, &qi) in x.iter_mut().zip(q) {
                        *xi += yj * qi;
                    }
                }
                let nx = norm(&x);
                x.iter_mut().for_each(|e| *e /= nx);
                let mx = matvec(m, &x)?;
                let lam = dot(&mx, &x);
                let residual = sqrt(mx.iter().zip(&x).map(|(p, q)| (p - lam * q) * (p - lam * q)).sum());
                if residual < best.1 {
                    best = (lam, residual);
                }
                if residual <= cfg.conv_tol {
                    let decided_below = matches!(stop, Stop::Below(t) if lam < t);
                    return Ok(Outcome {
                        result: EigResult {
                            value: lam,
                            vector: Some(x),
                            iterations,
                            residual,
                        },
                        decided_below,
                    });
                }
                if breakdown {
                    break;
                }
            }
        }
        if breakdown {
            break;
        }
        beta.push(b);
        core::mem::swap(&mut prev, &mut v);
        for i in 0..n {
            v[i] = w[i] / b;
        }
    }
    Err(Error::NotConverged {
        value: best.0,
        residual: best.1,
        iterations: alpha.len(),
    })
}

/// Extreme eigenpair of a sparse symmetric matrix.
///
/// The smallest eigenvalue is computed as `sigma - lambda_max(sigma I - M)`
/// with `sigma` the Gershgorin upper bound. Results are deterministic in
/// `cfg.seed`.
pub fn lanczos_extreme(m: &SparseSymMatrix, cfg: &LanczosConfig, which: Which) -> Result<EigResult> {
    lanczos_core(m, cfg, which, Stop::Converge).map(|o| o.result)
}

/// Decides whether `lambda_min(M) < threshold`.
///
/// Ritz values are upper bounds on `lambda_min`, so the iteration returns
/// `true` as soon as one drops below `threshold`; otherwise it runs to
/// convergence and compares the converged value.
pub fn lanczos_min_below(m: &SparseSymMatrix, cfg: &LanczosConfig, threshold: f64) -> Result<(bool, EigResult)> {
    lanczos_core(m, cfg, Which::Smallest, Stop::Below(threshold)).map(|o| (o.decided_below, o.result))
}

fn check_cap(dim: usize) -> Result<()> {
    if dim > DENSE_CAP {
        Err(Error::DimensionTooLarge { dim, cap: DENSE_CAP })
    } else {
        Ok(())
    }
}

/// Full spectrum of a symmetric matrix, ascending.
pub fn dense_symmetric_spectrum(m: &SparseSymMatrix) -> Result<Vec<f64>> {
    check_cap(m.dim())?;
    let a = DMatrix::from_row_slice(m.dim(), m.dim(), &m.to_dense());
    let mut eig: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// Full spectrum of a general square matrix, sorted by `(re, im)`.
pub fn dense_general_spectrum(m: &SparseMatrix) -> Result<Vec<Complex64>> {
    check_cap(m.dim())?;
    let a = DMatrix::from_row_slice(m.dim(), m.dim(), &m.to_dense());
    let mut eig: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
    eig.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(eig)
}

/// Smallest eigenvalue: dense below the cap, Lanczos above it.
pub fn min_eigenvalue(m: &SparseSymMatrix, cfg: &LanczosConfig) -> Result<f64> {
    if m.dim() <= DENSE_CAP {
        Ok(dense_symmetric_spectrum(m)?[0])
    } else {
        lanczos_extreme(m, cfg, Which::Smallest).map(|r| r.value)
    }
}
