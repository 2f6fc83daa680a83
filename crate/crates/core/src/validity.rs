//! Membership tests for the valid parameter space.
//!
//! | method          | cost          | `Valid` means                                 |
//! |-----------------|---------------|-----------------------------------------------|
//! | `DiagDominance` | assembly      | weakly diagonally dominant, hence `Q >= 0`    |
//! | `Circulant`     | `O(n)`        | `lambda_min(Q~) > margin` (approximation)     |
//! | `Certified`     | `O(n)`        | `lambda_min(Q) > 0`, rigorously               |
//! | `Limit`         | grid-free     | `Q > 0` on every lattice                      |
//! | `Exact`         | eigensolver   | `lambda_min(Q) > tol`                         |
//!
//! The certificate rests on interlacing: `Q` is a principal submatrix of the
//! circulant precision `P` on the doubled `2 n1 x 2 n2` torus, so
//! `lambda_min(P) <= lambda_min(Q)`.
//!
//! Verdicts carry an `elapsed` field that this crate leaves at zero, since it
//! has no clock; the `gmrf` crate fills it in.

use core::fmt;
use core::time::Duration;

use crate::error::{Error, Result};
use crate::oracle::{self, gershgorin_lower, LanczosConfig};
use crate::params::{GridDims, Theta};
use crate::precision::build_inner_precision;
use crate::spectrum::{limit_constant, min_eig_perturbed, Scan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    DiagDominance,
    Circulant,
    Certified,
    Limit,
    Exact,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::DiagDominance,
        Method::Circulant,
        Method::Certified,
        Method::Limit,
        Method::Exact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::DiagDominance => "diag_dominance",
            Method::Circulant => "circulant",
            Method::Certified => "certified",
            Method::Limit => "limit",
            Method::Exact => "exact",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Three-valued outcome of a membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Validity {
    Valid,
    /// The criterion rejects `theta`. For `DiagDominance` this only means the
    /// matrix is not diagonally dominant; for `Limit` it means invalid on all
    /// sufficiently large lattices.
    Invalid,
    Unknown,
}

impl Validity {
    pub fn is_valid(self) -> bool {
        self == Validity::Valid
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Validity::Valid => "true",
            Validity::Invalid => "false",
            Validity::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityVerdict {
    pub method: Method,
    pub valid: Validity,
    /// The eigenvalue or bound the decision rests on.
    pub min_eig_evidence: f64,
    /// `None` for the grid-free limit test.
    pub dims: Option<GridDims>,
    pub theta: Theta,
    pub elapsed: Duration,
}

impl ValidityVerdict {
    fn new(method: Method, valid: Validity, evidence: f64, dims: Option<GridDims>, theta: &Theta) -> Self {
        ValidityVerdict {
            method,
            valid,
            min_eig_evidence: evidence,
            dims,
            theta: *theta,
            elapsed: Duration::ZERO,
        }
    }
}

/// `1 - max interior absolute row sum`, computed from `theta` alone.
///
/// Interior sites have the most neighbours, so on any lattice with
/// `n1, n2 >= 3` the matrix is weakly diagonally dominant iff this is `>= 0`.
pub fn dd_slack(theta: &Theta) -> f64 {
    let cross = theta.phi.abs() + 2.0 * theta.rho12.abs() + 2.0 * theta.rho21.abs();
    1.0 - (cross + 4.0 * theta.rho11.abs()).max(cross + 4.0 * theta.rho22.abs())
}

pub fn dd_holds(theta: &Theta) -> bool {
    dd_slack(theta) >= 0.0
}

/// Row-wise weak diagonal dominance of the assembled inner precision.
///
/// The evidence is the Gershgorin lower bound `min_i (q_ii - sum |q_ij|)`.
pub fn diag_dominance_check(theta: &Theta, dims: GridDims) -> Result<ValidityVerdict> {
    let q = build_inner_precision(theta, dims)?;
    let bound = gershgorin_lower(&q);
    let valid = if bound >= 0.0 { Validity::Valid } else { Validity::Invalid };
    Ok(ValidityVerdict::new(Method::DiagDominance, valid, bound, Some(dims), theta))
}

fn check_margin(margin: f64) -> Result<()> {
    if margin >= 0.0 && margin.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(margin))
    }
}

/// `lambda_min(Q~) > margin`, from the closed form without assembly.
pub fn circulant_check(theta: &Theta, dims: GridDims, margin: f64) -> Result<ValidityVerdict> {
    check_margin(margin)?;
    let lam = min_eig_perturbed(theta, dims, Scan::Reduced);
    let valid = if lam > margin { Validity::Valid } else { Validity::Invalid };
    Ok(ValidityVerdict::new(Method::Circulant, valid, lam, Some(dims), theta))
}

/// Rigorous sufficient condition: `lambda_min(Q~)` on the doubled torus.
///
/// A positive bound proves validity; otherwise the answer is unknown.
pub fn certified_check(theta: &Theta, dims: GridDims) -> Result<ValidityVerdict> {
    let b = min_eig_perturbed(theta, dims.doubled(), Scan::Reduced);
    let valid = if b > 0.0 { Validity::Valid } else { Validity::Unknown };
    Ok(ValidityVerdict::new(Method::Certified, valid, b, Some(dims), theta))
}

/// Grid-free test through the limit constant `C(theta)`.
///
/// `C > tol` proves validity on every lattice; `C < -tol` proves that large
/// enough lattices are invalid, without saying which.
pub fn limit_check(theta: &Theta, tol: f64) -> Result<ValidityVerdict> {
    let c = limit_constant(theta, tol)?;
    let valid = if c.value > tol {
        Validity::Valid
    } else if c.value < -tol {
        Validity::Invalid
    } else {
        Validity::Unknown
    };
    Ok(ValidityVerdict::new(Method::Limit, valid, c.value, None, theta))
}

/// Ground truth: `lambda_min(Q) > tol` from the eigenvalue oracle.
///
/// Dense for `2n <= 2000`, Lanczos above; non-convergence is returned as an
/// error rather than a verdict.
pub fn exact_check(theta: &Theta, dims: GridDims, tol: f64, cfg: &LanczosConfig) -> Result<ValidityVerdict> {
    exact_check_inner(theta, dims, Some(tol), cfg)
}

/// Threshold used when none is given: zero for the dense solver,
/// `1e-10 ||Q||_1` for the iterative one.
pub fn default_exact_tol(q: &crate::sparse::SparseSymMatrix) -> f64 {
    if q.dim() <= oracle::DENSE_CAP {
        0.0
    } else {
        1e-10 * q.norm1()
    }
}

fn exact_check_inner(theta: &Theta, dims: GridDims, tol: Option<f64>, cfg: &LanczosConfig) -> Result<ValidityVerdict> {
    if let Some(t) = tol {
        check_margin(t)?;
    }
    let q = build_inner_precision(theta, dims)?;
    let tol = tol.unwrap_or_else(|| default_exact_tol(&q));
    let lam = oracle::min_eigenvalue(&q, cfg)?;
    let valid = if lam > tol { Validity::Valid } else { Validity::Invalid };
    Ok(ValidityVerdict::new(Method::Exact, valid, lam, Some(dims), theta))
}

/// Margins and oracle settings shared by [`check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    /// Margin for the circulant test.
    pub margin: f64,
    /// Dead zone around zero for the limit test.
    pub limit_tol: f64,
    /// Threshold for the exact test; `None` picks [`default_exact_tol`].
    pub exact_tol: Option<f64>,
    pub lanczos: LanczosConfig,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            margin: 0.0,
            limit_tol: 1e-10,
            exact_tol: None,
            lanczos: LanczosConfig::default(),
        }
    }
}

/// Dispatches to the test selected by `method`.
pub fn check(method: Method, theta: &Theta, dims: GridDims, opts: &CheckOptions) -> Result<ValidityVerdict> {
    match method {
        Method::DiagDominance => diag_dominance_check(theta, dims),
        Method::Circulant => circulant_check(theta, dims, opts.margin),
        Method::Certified => certified_check(theta, dims),
        Method::Limit => limit_check(theta, opts.limit_tol),
        Method::Exact => exact_check_inner(theta, dims, opts.exact_tol, &opts.lanczos),
    }
}
