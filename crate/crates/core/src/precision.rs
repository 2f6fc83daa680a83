//! Assembly of the bivariate precision matrix, its toroidal (block-circulant)
//! counterpart and the difference between the two.
//!
//! The `2n` unknowns are ordered variable-major: all `n` sites of the first
//! variable, then all `n` sites of the second. Within a variable, sites follow
//! [`GridDims`] ordering.

use alloc::vec::Vec;

use crate::error::Result;
use crate::params::{GridDims, Tau, Theta};
use crate::sparse::{SparseMatrix, SparseSymMatrix};

/// Stencil coefficients of one `n x n` block: `x` couples a site to its
/// predecessor, `y` to itself and `z` to its successor along both lattice axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Stencil {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Stencil { x, y, z }
    }

    /// `(rho11, 1, rho11)`
    pub fn first(theta: &Theta) -> Self {
        Stencil::new(theta.rho11, 1.0, theta.rho11)
    }

    /// `(rho22, 1, rho22)`
    pub fn second(theta: &Theta) -> Self {
        Stencil::new(theta.rho22, 1.0, theta.rho22)
    }

    /// `(rho21, phi, rho12)`
    pub fn cross(theta: &Theta) -> Self {
        Stencil::new(theta.rho21, theta.phi, theta.rho12)
    }
}

/// Boundary handling of a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Free boundary: block-Toeplitz with tridiagonal diagonal blocks.
    Open,
    /// Toroidal boundary: block-circulant with circulant diagonal blocks.
    Torus,
}

/// Visits every `(row, col, value)` of one stencil block, zeros included.
fn for_each_block_entry(
    s: Stencil,
    dims: GridDims,
    boundary: Boundary,
    mut emit: impl FnMut(usize, usize, f64),
) {
    let (n1, n2) = (dims.n1(), dims.n2());
    let wrap = boundary == Boundary::Torus;
    for i in 0..n2 {
        for j in 0..n1 {
            let p = i * n1 + j;
            emit(p, p, s.y);
            if j > 0 {
                emit(p, p - 1, s.x);
            } else if wrap {
                emit(p, p + n1 - 1, s.x);
            }
            if j + 1 < n1 {
                emit(p, p + 1, s.z);
            } else if wrap {
                emit(p, p + 1 - n1, s.z);
            }
            if i > 0 {
                emit(p, p - n1, s.x);
            } else if wrap {
                emit(p, p + (n2 - 1) * n1, s.x);
            }
            if i + 1 < n2 {
                emit(p, p + n1, s.z);
            } else if wrap {
                emit(p, j, s.z);
            }
        }
    }
}

fn build_block(x: f64, y: f64, z: f64, dims: GridDims, boundary: Boundary) -> Result<SparseMatrix> {
    let mut raw = Vec::with_capacity(5 * dims.n());
    for_each_block_entry(Stencil::new(x, y, z), dims, boundary, |r, c, v| {
        raw.push((r, c, v))
    });
    SparseMatrix::from_triplets(dims.n(), raw)
}

/// Block-Toeplitz `T(x, y, z)`: `tridiag(x, y, z)` on the block diagonal,
/// `diag(z)` above it and `diag(x)` below it.
pub fn build_toeplitz_block(x: f64, y: f64, z: f64, dims: GridDims) -> Result<SparseMatrix> {
    build_block(x, y, z, dims, Boundary::Open)
}

/// Block-circulant `C(x, y, z)`: `T(x, y, z)` with `circ` diagonal blocks and
/// the wrap-around blocks `diag(x)` at `(0, n2 - 1)` and `diag(z)` at `(n2 - 1, 0)`.
pub fn build_circulant_block(x: f64, y: f64, z: f64, dims: GridDims) -> Result<SparseMatrix> {
    build_block(x, y, z, dims, Boundary::Torus)
}

/// Assembles `[[A, B], [B^T, D]]` scaled by `diag(1/tau1, 1/tau2)` on both sides.
fn assemble(theta: &Theta, tau: Tau, dims: GridDims, boundary: Boundary) -> Result<SparseSymMatrix> {
    let n = dims.n();
    let (s1, s2) = (1.0 / tau.tau1(), 1.0 / tau.tau2());
    let mut raw = Vec::with_capacity(10 * n);
    for_each_block_entry(Stencil::first(theta), dims, boundary, |r, c, v| {
        if r <= c {
            raw.push((r, c, v * s1 * s1));
        }
    });
    for_each_block_entry(Stencil::second(theta), dims, boundary, |r, c, v| {
        if r <= c {
            raw.push((n + r, n + c, v * s2 * s2));
        }
    });
    for_each_block_entry(Stencil::cross(theta), dims, boundary, |r, c, v| {
        raw.push((r, n + c, v * s1 * s2));
    });
    SparseSymMatrix::from_triplets(2 * n, raw)
}

/// Full precision `Q(theta, tau)` of size `2n`.
pub fn build_precision(theta: &Theta, tau: Tau, dims: GridDims) -> Result<SparseSymMatrix> {
    assemble(theta, tau, dims, Boundary::Open)
}

/// Inner precision `Q(theta)`, i.e. [`build_precision`] with unit `tau`.
pub fn build_inner_precision(theta: &Theta, dims: GridDims) -> Result<SparseSymMatrix> {
    assemble(theta, Tau::unit(), dims, Boundary::Open)
}

/// Toroidal approximation `Q~(theta)` built from `C` blocks.
pub fn build_perturbed_precision(theta: &Theta, dims: GridDims) -> Result<SparseSymMatrix> {
    assemble(theta, Tau::unit(), dims, Boundary::Torus)
}

/// Upper bound on `nnz(Q)`, attained when all five parameters are non-zero.
pub fn precision_nnz_bound(dims: GridDims) -> usize {
    20 * dims.n() - 8 * dims.n1() - 8 * dims.n2()
}

/// Upper bound on `nnz(Q~ - Q)`.
pub fn perturbation_nnz_bound(dims: GridDims) -> usize {
    8 * (dims.n1() + dims.n2())
}

/// `Q`, `Q~` and `Q~ - Q` for one parameter value.
#[derive(Debug, Clone)]
pub struct PrecisionBundle {
    pub q: SparseSymMatrix,
    pub q_tilde: SparseSymMatrix,
    pub delta_q: SparseSymMatrix,
    pub dims: GridDims,
    pub theta: Theta,
}

pub fn build_bundle(theta: &Theta, dims: GridDims) -> Result<PrecisionBundle> {
    let q = build_inner_precision(theta, dims)?;
    let q_tilde = build_perturbed_precision(theta, dims)?;
    let delta_q = q_tilde.sub(&q)?;
    debug_assert!(q.nnz() <= precision_nnz_bound(dims));
    debug_assert!(delta_q.nnz() <= perturbation_nnz_bound(dims));
    Ok(PrecisionBundle {
        q,
        q_tilde,
        delta_q,
        dims,
        theta: *theta,
    })
}
