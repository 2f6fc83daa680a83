//! Validity of the bivariate first-order GMRF on a regular lattice.
//!
//! The precision matrix of the model is block-Toeplitz; replacing it with its
//! block-circulant (toroidal) counterpart yields a closed-form spectrum, which
//! turns the positive-definiteness test into an `O(n)` evaluation. This crate
//! provides the matrices, the closed forms, rigorous and heuristic membership
//! tests, ground-truth eigenvalue oracles, samplers and the convergence study.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod error;
mod math;
pub mod params;
pub mod precision;
pub mod oracle;
pub mod sampler;
pub mod sparse;
pub mod spectrum;
pub mod study;
pub mod validity;

pub use error::{Error, Result};
pub use oracle::{lanczos_extreme, EigResult, LanczosConfig, Which};
pub use params::{GridDims, Tau, Theta};
pub use precision::{build_bundle, build_inner_precision, build_perturbed_precision, build_precision, PrecisionBundle};
pub use sampler::{sample_conditional_slice, sample_valid, SampleBatch, SampleBox};
pub use sparse::{SparseMatrix, SparseSymMatrix};
pub use spectrum::{limit_constant, min_eig_perturbed, perturbed_spectrum, LimitConstant, PerturbedSpectrum, Scan, SpectralGrid};
pub use study::{convergence_sweep, fit_loglog, ConvergenceRecord, SlopeFit};
pub use validity::{Method, Validity, ValidityVerdict};
