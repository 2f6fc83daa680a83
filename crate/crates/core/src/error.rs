use core::fmt;

/// Errors raised by the assembly, spectral and oracle routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Both lattice dimensions must be at least 3.
    InvalidDims { n1: usize, n2: usize },
    /// A marginal standard deviation was not strictly positive.
    NonPositiveTau { tau1: f64, tau2: f64 },
    /// A parameter component was NaN or infinite.
    NonFiniteTheta,
    /// The symmetric-case spectrum was requested with `rho12 != rho21`.
    AsymmetricCrossCoupling { rho12: f64, rho21: f64 },
    /// A one-dimensional size argument was below its minimum.
    InvalidSize { n: usize, min: usize },
    /// A tolerance or margin argument was out of range.
    InvalidTolerance(f64),
    /// Operand lengths disagree.
    DimensionMismatch { expected: usize, found: usize },
    /// The dense oracle refuses matrices above its size cap.
    DimensionTooLarge { dim: usize, cap: usize },
    /// Lanczos hit `max_iter` before the Ritz residual dropped below tolerance.
    NotConverged { value: f64, residual: f64, iterations: usize },
    /// A configuration field violated its invariant.
    InvalidConfig(&'static str),
    /// Not enough strictly positive points to fit a line.
    TooFewPoints { usable: usize, excluded: usize },
    /// Rejection sampling accepted too rarely after the warm-up budget.
    AcceptanceTooLow { accepted: u64, proposed: u64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDims { n1, n2 } => {
                write!(f, "invalid grid {n1}x{n2}: both dimensions must be >= 3")
            }
            Error::NonPositiveTau { tau1, tau2 } => {
                write!(f, "tau must be strictly positive, got ({tau1}, {tau2})")
            }
            Error::NonFiniteTheta => f.write_str("theta has a non-finite component"),
            Error::AsymmetricCrossCoupling { rho12, rho21 } => write!(
                f,
                "exact symmetric spectrum needs rho12 == rho21, got {rho12} and {rho21}"
            ),
            Error::InvalidSize { n, min } => write!(f, "size {n} is below the minimum {min}"),
            Error::InvalidTolerance(t) => write!(f, "tolerance out of range: {t}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::DimensionTooLarge { dim, cap } => {
                write!(f, "matrix of dimension {dim} exceeds dense cap {cap}")
            }
            Error::NotConverged {
                value,
                residual,
                iterations,
            } => write!(
                f,
                "Lanczos did not converge after {iterations} iterations \
                 (best Ritz value {value}, residual {residual:e})"
            ),
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
            Error::TooFewPoints { usable, excluded } => write!(
                f,
                "need at least 3 positive points for a log-log fit, \
                 have {usable} ({excluded} excluded)"
            ),
            Error::AcceptanceTooLow { accepted, proposed } => write!(
                f,
                "acceptance rate too low: {accepted} of {proposed} proposals accepted"
            ),
        }
    }
}

impl core::error::Error for Error {}
