//! Parameter vectors and lattice dimensions.

use crate::error::{Error, Result};

/// Interaction parameters `(phi, rho11, rho12, rho21, rho22)`.
///
/// `phi` couples the two variables at the same site, `rho11`/`rho22` couple
/// neighbouring sites of the same variable and `rho12`/`rho21` are the two
/// directional cross couplings. No range is imposed here: deciding whether a
/// value is admissible is the job of [`crate::validity`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Theta {
    pub phi: f64,
    pub rho11: f64,
    pub rho12: f64,
    pub rho21: f64,
    pub rho22: f64,
}

impl Theta {
    pub fn new(phi: f64, rho11: f64, rho12: f64, rho21: f64, rho22: f64) -> Result<Self> {
        let theta = Theta {
            phi,
            rho11,
            rho12,
            rho21,
            rho22,
        };
        if theta.is_finite() {
            Ok(theta)
        } else {
            Err(Error::NonFiniteTheta)
        }
    }

    pub const fn zero() -> Self {
        Theta {
            phi: 0.0,
            rho11: 0.0,
            rho12: 0.0,
            rho21: 0.0,
            rho22: 0.0,
        }
    }

    pub fn from_array(a: [f64; 5]) -> Result<Self> {
        Theta::new(a[0], a[1], a[2], a[3], a[4])
    }

    pub fn to_array(self) -> [f64; 5] {
        [self.phi, self.rho11, self.rho12, self.rho21, self.rho22]
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// `rho12 == rho21`, the case where the four blocks share an eigenbasis.
    pub fn is_cross_symmetric(&self) -> bool {
        self.rho12 == self.rho21
    }

    /// True when every neighbour coupling vanishes.
    pub fn has_no_neighbour_coupling(&self) -> bool {
        self.rho11 == 0.0 && self.rho12 == 0.0 && self.rho21 == 0.0 && self.rho22 == 0.0
    }
}

/// Marginal standard deviations of the two variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tau {
    tau1: f64,
    tau2: f64,
}

impl Tau {
    pub fn new(tau1: f64, tau2: f64) -> Result<Self> {
        if tau1 > 0.0 && tau2 > 0.0 && tau1.is_finite() && tau2.is_finite() {
            Ok(Tau { tau1, tau2 })
        } else {
            Err(Error::NonPositiveTau { tau1, tau2 })
        }
    }

    pub const fn unit() -> Self {
        Tau {
            tau1: 1.0,
            tau2: 1.0,
        }
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn tau2(&self) -> f64 {
        self.tau2
    }
}

/// Lattice size `n1 x n2`.
///
/// Sites are flattened row-major with the `n1` direction fastest: site
/// `(i, j)` with block index `i < n2` and in-block index `j < n1` lives at
/// `i * n1 + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridDims {
    n1: usize,
    n2: usize,
}

impl GridDims {
    /// Smallest admissible side; below it the circulant corners collide with
    /// the tridiagonal band.
    pub const MIN_SIDE: usize = 3;

    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 >= Self::MIN_SIDE && n2 >= Self::MIN_SIDE && n1.checked_mul(n2).is_some() {
            Ok(GridDims { n1, n2 })
        } else {
            Err(Error::InvalidDims { n1, n2 })
        }
    }

    pub fn square(side: usize) -> Result<Self> {
        Self::new(side, side)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Number of sites `n1 * n2`.
    pub fn n(&self) -> usize {
        self.n1 * self.n2
    }

    /// Lattice with both sides doubled, used by the embedding certificate.
    pub fn doubled(&self) -> Self {
        GridDims {
            n1: 2 * self.n1,
            n2: 2 * self.n2,
        }
    }

    /// `(n1 mod 2, n2 mod 2)`.
    pub fn parity(&self) -> (u8, u8) {
        ((self.n1 % 2) as u8, (self.n2 % 2) as u8)
    }
}

impl core::fmt::Display for GridDims {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}x{}", self.n1, self.n2)
    }
}
