//! Coordinate-format sparse matrices.
//!
//! Both types keep their entries sorted by `(row, col)`, deduplicated and
//! free of explicit zeros, so pattern and `nnz` comparisons are exact.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Sorts by position, sums repeated positions and drops zeros.
fn normalize(mut raw: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    raw.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(raw.len());
    for (r, c, v) in raw {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out.retain(|e| e.2 != 0.0);
    out
}

fn check_index(dim: usize, r: usize, c: usize) -> Result<()> {
    if r >= dim || c >= dim {
        Err(Error::DimensionMismatch {
            expected: dim,
            found: r.max(c) + 1,
        })
    } else {
        Ok(())
    }
}

/// Square sparse matrix without symmetry, used for the `T` and `C` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    /// Builds from triplets; repeated positions are summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut raw = Vec::new();
        for (r, c, v) in triplets {
            check_index(dim, r, c)?;
            raw.push((r, c, v));
        }
        Ok(SparseMatrix {
            dim,
            entries: normalize(raw),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        match self
            .entries
            .binary_search_by(|&(er, ec, _)| (er, ec).cmp(&(r, c)))
        {
            Ok(k) => self.entries[k].2,
            Err(_) => 0.0,
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut entries: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        SparseMatrix {
            dim: self.dim,
            entries,
        }
    }

    /// `self - other`, dropping cancelled entries.
    pub fn sub(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let neg = other.entries.iter().map(|&(r, c, v)| (r, c, -v));
        SparseMatrix::from_triplets(self.dim, self.entries.iter().copied().chain(neg))
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = alloc::vec![0.0; self.dim];
        for &(r, _, v) in &self.entries {
            sums[r] += v;
        }
        sums
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = alloc::vec![0.0; self.dim * self.dim];
        for &(r, c, v) in &self.entries {
            out[r * self.dim + c] = v;
        }
        out
    }
}

/// Real symmetric sparse matrix stored as its upper triangle (`row <= col`).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymMatrix {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseSymMatrix {
    /// Builds from triplets describing one triangle. Lower-triangle positions
    /// are folded onto the upper one and repeated positions are summed, so
    /// each off-diagonal pair must be supplied exactly once.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut raw = Vec::new();
        for (r, c, v) in triplets {
            check_index(dim, r, c)?;
            raw.push(if r <= c { (r, c, v) } else { (c, r, v) });
        }
        Ok(SparseSymMatrix {
            dim,
            entries: normalize(raw),
        })
    }

    pub fn identity(dim: usize) -> Self {
        SparseSymMatrix {
            dim,
            entries: (0..dim).map(|i| (i, i, 1.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Upper-triangle entries, sorted by `(row, col)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Number of stored (upper-triangle) entries.
    pub fn stored_len(&self) -> usize {
        self.entries.len()
    }

    /// Non-zeros of the full symmetric matrix.
    pub fn nnz(&self) -> usize {
        self.entries
            .iter()
            .map(|&(r, c, _)| if r == c { 1 } else { 2 })
            .sum()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let key = if r <= c { (r, c) } else { (c, r) };
        match self
            .entries
            .binary_search_by(|&(er, ec, _)| (er, ec).cmp(&key))
        {
            Ok(k) => self.entries[k].2,
            Err(_) => 0.0,
        }
    }

    pub fn trace(&self) -> f64 {
        self.entries
            .iter()
            .filter(|&&(r, c, _)| r == c)
            .map(|&(_, _, v)| v)
            .sum()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, &(_, _, v)| m.max(v.abs()))
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm1(&self) -> f64 {
        self.row_abs_sums()
            .iter()
            .fold(0.0, |m, &(d, off)| m.max(d.abs() + off))
    }

    /// Per row: the diagonal entry and the sum of absolute off-diagonal entries.
    pub fn row_abs_sums(&self) -> Vec<(f64, f64)> {
        let mut rows = alloc::vec![(0.0, 0.0); self.dim];
        for &(r, c, v) in &self.entries {
            if r == c {
                rows[r].0 = v;
            } else {
                rows[r].1 += v.abs();
                rows[c].1 += v.abs();
            }
        }
        rows
    }

    /// `self - other`, dropping cancelled entries.
    pub fn sub(&self, other: &SparseSymMatrix) -> Result<SparseSymMatrix> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let neg = other.entries.iter().map(|&(r, c, v)| (r, c, -v));
        SparseSymMatrix::from_triplets(self.dim, self.entries.iter().copied().chain(neg))
    }

    /// Row-major dense copy of the full matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut out = alloc::vec![0.0; n * n];
        for &(r, c, v) in &self.entries {
            out[r * n + c] = v;
            out[c * n + r] = v;
        }
        out
    }
}
