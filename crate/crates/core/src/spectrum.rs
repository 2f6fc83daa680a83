//! Closed-form spectra.
//!
//! Every `C(x, y, z)` block is diagonalised by the same two-dimensional
//! Fourier basis. Mode `(i, j)` with `s = 2 pi i / n2`, `t = 2 pi j / n1` has
//! eigenvalue
//!
//! ```text
//! y + z e^{-is} + x e^{is} + z e^{-it} + x e^{it}
//!   = y + (x + z)(cos s + cos t) + i (x - z)(sin s + sin t)
//! ```
//!
//! so `Q~` splits into `n` Hermitian 2x2 blocks whose eigenvalues are
//! `(l11 + l22 -/+ sqrt((l11 - l22)^2 + 4 |l12|^2)) / 2`.
//!
//! Writing `w = e^{is} + e^{it} = a + ib`, the lower branch equals
//! `1 + (rho11 + rho22) a - |A w + c|` for a fixed real-linear map `A` and
//! offset `c`, i.e. a concave function of `w`. Its minimum over the lattice
//! modes is therefore attained at a vertex of the convex hull of the points
//! `w_ij`, which is the Minkowski sum of a regular `n2`-gon and a regular
//! `n1`-gon. [`Scan::Reduced`] evaluates only the `O(max(n1, n2))` modes
//! around those vertices.

use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{cos, floor, rem_euclid, sin, sqrt, PI, TAU};
use crate::params::{GridDims, Theta};

/// Cosines and sines of `2 pi k / n`, `k = 0..n`.
#[derive(Debug, Clone)]
struct Roots {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Roots {
    fn new(n: usize) -> Self {
        let angle = |k: usize| TAU * k as f64 / n as f64;
        Roots {
            cos: (0..n).map(|k| cos(angle(k))).collect(),
            sin: (0..n).map(|k| sin(angle(k))).collect(),
        }
    }
}

/// Lower and upper eigenvalue of the Hermitian block `[[l11, l12], [conj l12, l22]]`.
#[inline]
pub fn hermitian_2x2_eigs(l11: f64, l22: f64, l12_norm_sqr: f64) -> (f64, f64) {
    let d = l11 - l22;
    let root = sqrt(d * d + 4.0 * l12_norm_sqr);
    (0.5 * (l11 + l22 - root), 0.5 * (l11 + l22 + root))
}

/// The spectral symbol of `Q~` at `w = a + ib`, returned as `(l11, l22, l12)`.
#[inline]
fn symbol_blocks(theta: &Theta, a: f64, b: f64) -> (f64, f64, Complex64) {
    let l11 = 1.0 + 2.0 * theta.rho11 * a;
    let l22 = 1.0 + 2.0 * theta.rho22 * a;
    let l12 = Complex64::new(
        theta.phi + (theta.rho21 + theta.rho12) * a,
        (theta.rho21 - theta.rho12) * b,
    );
    (l11, l22, l12)
}

#[inline]
fn symbol_minus(theta: &Theta, a: f64, b: f64) -> f64 {
    let (l11, l22, l12) = symbol_blocks(theta, a, b);
    hermitian_2x2_eigs(l11, l22, l12.norm_sqr()).0
}

/// Lower branch of the continuous symbol at angles `(s, t)` on the torus.
pub fn symbol_lower(theta: &Theta, s: f64, t: f64) -> f64 {
    symbol_minus(theta, cos(s) + cos(t), sin(s) + sin(t))
}

/// Eigenvalues of `C(x, y, z)` as an `n2 x n1` row-major array (`i * n1 + j`).
pub fn circulant_block_eigs(x: f64, y: f64, z: f64, dims: GridDims) -> Vec<Complex64> {
    let (rs, rt) = (Roots::new(dims.n2()), Roots::new(dims.n1()));
    let mut out = Vec::with_capacity(dims.n());
    for i in 0..dims.n2() {
        for j in 0..dims.n1() {
            let a = rs.cos[i] + rt.cos[j];
            let b = rs.sin[i] + rt.sin[j];
            out.push(Complex64::new(y + (x + z) * a, (x - z) * b));
        }
    }
    out
}

/// Eigenvalues of the three distinct circulant blocks of `Q~`.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    pub dims: GridDims,
    /// Block `C(rho11, 1, rho11)`, real.
    pub lam11: Vec<f64>,
    /// Block `C(rho22, 1, rho22)`, real.
    pub lam22: Vec<f64>,
    /// Block `C(rho21, phi, rho12)`.
    pub lam12: Vec<Complex64>,
}

impl SpectralGrid {
    pub fn new(theta: &Theta, dims: GridDims) -> Self {
        let (rs, rt) = (Roots::new(dims.n2()), Roots::new(dims.n1()));
        let n = dims.n();
        let (mut lam11, mut lam22, mut lam12) =
            (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for i in 0..dims.n2() {
            for j in 0..dims.n1() {
                let (l11, l22, l12) =
                    symbol_blocks(theta, rs.cos[i] + rt.cos[j], rs.sin[i] + rt.sin[j]);
                lam11.push(l11);
                lam22.push(l22);
                lam12.push(l12);
            }
        }
        SpectralGrid {
            dims,
            lam11,
            lam22,
            lam12,
        }
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.dims.n1() + j
    }
}

/// Which of the two eigenvalues of a 2x2 mode block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Branch {
    Minus,
    Plus,
}

/// Location of an eigenvalue of `Q~`: Fourier mode `(i, j)` and branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModeIndex {
    pub i: usize,
    pub j: usize,
    pub branch: Branch,
}

/// The full spectrum of `Q~`, split by branch.
#[derive(Debug, Clone)]
pub struct PerturbedSpectrum {
    pub dims: GridDims,
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    pub min_eig: f64,
    pub argmin: ModeIndex,
}

impl PerturbedSpectrum {
    /// All `2n` eigenvalues in ascending order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut all: Vec<f64> = self.minus.iter().chain(&self.plus).copied().collect();
        all.sort_by(f64::total_cmp);
        all
    }
}

/// Closed-form spectrum of `Q~` in `Theta(n)` operations.
pub fn perturbed_spectrum(theta: &Theta, dims: GridDims) -> PerturbedSpectrum {
    let grid = SpectralGrid::new(theta, dims);
    let n = dims.n();
    let mut minus = Vec::with_capacity(n);
    let mut plus = Vec::with_capacity(n);
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..n {
        let (lo, hi) = hermitian_2x2_eigs(grid.lam11[k], grid.lam22[k], grid.lam12[k].norm_sqr());
        if lo < best.0 {
            best = (lo, k);
        }
        minus.push(lo);
        plus.push(hi);
    }
    PerturbedSpectrum {
        dims,
        minus,
        plus,
        min_eig: best.0,
        argmin: ModeIndex {
            i: best.1 / dims.n1(),
            j: best.1 % dims.n1(),
            branch: Branch::Minus,
        },
    }
}

/// How many modes [`perturbed_minimum`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scan {
    /// All `n` modes.
    Full,
    /// Only modes adjacent to vertices of the convex hull of the symbol's
    /// argument, `O(max(n1, n2))` of them.
    #[default]
    Reduced,
}

/// Smallest eigenvalue of `Q~` and the mode attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMin {
    pub value: f64,
    pub i: usize,
    pub j: usize,
    /// Number of modes evaluated.
    pub evaluated: usize,
}

/// Floor division for possibly negative numerators.
fn div_floor(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

/// Modes `(i, j)` whose normal cones in the two polygons can overlap, plus a
/// one-mode margin on each side. Visits each long-axis index once.
fn for_each_hull_mode(dims: GridDims, mut visit: impl FnMut(usize, usize)) {
    let (n1, n2) = (dims.n1() as i64, dims.n2() as i64);
    // Iterate over the longer axis; for index `k` on it the short-axis modes
    // `m` with |m / short - k / long| <= 1/(2 short) + 1/(2 long) qualify.
    let (long, short) = if n2 >= n1 { (n2, n1) } else { (n1, n2) };
    for k in 0..long {
        let lo = -div_floor(-(2 * short * k - (short + long)), 2 * long) - 1;
        let hi = div_floor(2 * short * k + short + long, 2 * long) + 1;
        let (lo, hi) = if hi - lo + 1 >= short { (0, short - 1) } else { (lo, hi) };
        for m in lo..=hi {
            let m = m.rem_euclid(short) as usize;
            if n2 >= n1 {
                visit(k as usize, m);
            } else {
                visit(m, k as usize);
            }
        }
    }
}

/// Minimum eigenvalue of `Q~` without materialising the spectrum.
///
/// Both scan modes evaluate each mode with the same arithmetic, so whenever
/// the reduced candidate set contains a minimiser the two results are
/// bit-identical.
pub fn perturbed_minimum(theta: &Theta, dims: GridDims, scan: Scan) -> SpectralMin {
    let (rs, rt) = (Roots::new(dims.n2()), Roots::new(dims.n1()));
    let mut best = SpectralMin {
        value: f64::INFINITY,
        i: 0,
        j: 0,
        evaluated: 0,
    };
    let mut consider = |i: usize, j: usize| {
        let v = symbol_minus(theta, rs.cos[i] + rt.cos[j], rs.sin[i] + rt.sin[j]);
        best.evaluated += 1;
        if v < best.value || (v == best.value && (i, j) < (best.i, best.j)) {
            best.value = v;
            best.i = i;
            best.j = j;
        }
    };
    match scan {
        Scan::Full => {
            for i in 0..dims.n2() {
                for j in 0..dims.n1() {
                    consider(i, j);
                }
            }
        }
        Scan::Reduced => for_each_hull_mode(dims, consider),
    }
    best
}

/// Smallest eigenvalue of `Q~_{n1,n2}(theta)`.
pub fn min_eig_perturbed(theta: &Theta, dims: GridDims, scan: Scan) -> f64 {
    perturbed_minimum(theta, dims, scan).value
}

/// Exact spectrum of `Q` (not `Q~`) when `rho12 == rho21`, ascending.
///
/// All four blocks are then polynomials in `S (x) I` and `I (x) S` with
/// `S = tridiag(1, 0, 1)`, whose eigenvalues are `2 cos(k pi / (m + 1))`.
pub fn exact_symmetric_spectrum(theta: &Theta, dims: GridDims) -> Result<Vec<f64>> {
    if !theta.is_cross_symmetric() {
        return Err(Error::AsymmetricCrossCoupling {
            rho12: theta.rho12,
            rho21: theta.rho21,
        });
    }
    let path = |m: usize| -> Vec<f64> {
        (1..=m)
            .map(|k| 2.0 * cos(k as f64 * PI / (m as f64 + 1.0)))
            .collect()
    };
    let (e1, e2) = (path(dims.n1()), path(dims.n2()));
    let mut out = Vec::with_capacity(2 * dims.n());
    for &u in &e2 {
        for &v in &e1 {
            let s = u + v;
            let a = 1.0 + theta.rho11 * s;
            let d = 1.0 + theta.rho22 * s;
            let b = theta.phi + theta.rho12 * s;
            let (lo, hi) = hermitian_2x2_eigs(a, d, b * b);
            out.push(lo);
            out.push(hi);
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Infimum of the lower symbol branch over the continuous torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConstant {
    pub value: f64,
    /// Minimising angles `(s, t)` in `[0, 2 pi)^2`.
    pub argmin_angles: (f64, f64),
    pub tolerance: f64,
}

/// Coarse grid resolution per axis for [`limit_constant`].
pub const LIMIT_GRID: usize = 256;
const LIMIT_STARTS: usize = 8;
const LIMIT_DIAGONAL: usize = 1 << 14;
const LIMIT_MAX_STEPS: usize = 100_000;

/// Compass search on the torus from `(s, t)` until the step drops below `tol`.
fn refine(theta: &Theta, mut s: f64, mut t: f64, mut value: f64, tol: f64) -> (f64, f64, f64) {
    let mut h = TAU / LIMIT_GRID as f64;
    let mut steps = 0;
    while h >= tol && steps < LIMIT_MAX_STEPS {
        steps += 1;
        let mut moved = false;
        for (ds, dt) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, h), (-h, -h)] {
            let (cs, ct) = (rem_euclid(s + ds, TAU), rem_euclid(t + dt, TAU));
            let v = symbol_lower(theta, cs, ct);
            if v < value {
                s = cs;
                t = ct;
                value = v;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    (s, t, value)
}

/// `C(theta) = min_{s,t} lambda_-(s, t)`, the common lower bound and limit of
/// `lambda_min(Q~_{n1,n2})` over all lattice sizes.
///
/// A `LIMIT_GRID x LIMIT_GRID` sweep seeds compass searches from the best grid
/// local minima; the search step halves until it falls below `tol`.
pub fn limit_constant(theta: &Theta, tol: f64) -> Result<LimitConstant> {
    if !(tol > 0.0) {
        return Err(Error::InvalidTolerance(tol));
    }
    let g = LIMIT_GRID;
    let roots = Roots::new(g);
    let mut values = alloc::vec![0.0; g * g];
    for a in 0..g {
        for b in 0..g {
            values[a * g + b] =
                symbol_minus(theta, roots.cos[a] + roots.cos[b], roots.sin[a] + roots.sin[b]);
        }
    }
    let at = |a: usize, b: usize| values[(a % g) * g + (b % g)];
    let mut seeds: Vec<(f64, usize, usize)> = Vec::new();
    for a in 0..g {
        for b in 0..g {
            let v = at(a, b);
            let is_local_min = [(1, 0), (g - 1, 0), (0, 1), (0, g - 1), (1, 1), (g - 1, g - 1), (1, g - 1), (g - 1, 1)]
                .iter()
                .all(|&(da, db)| v <= at(a + da, b + db));
            if is_local_min {
                seeds.push((v, a, b));
            }
        }
    }
    seeds.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let step = TAU / g as f64;
    let mut best = match seeds.first() {
        Some(&(v, a, b)) => (a as f64 * step, b as f64 * step, v),
        None => {
            let (k, v) = values
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
            ((k / g) as f64 * step, (k % g) as f64 * step, v)
        }
    };
    // The symbol's argument w = e^{is} + e^{it} fills the disc |w| <= 2 and the
    // lower branch is concave in w, so the infimum sits on the circle s = t.
    // A fine scan of that diagonal supplies one more start.
    let diag = (0..LIMIT_DIAGONAL)
        .map(|k| {
            let psi = TAU * k as f64 / LIMIT_DIAGONAL as f64;
            (symbol_lower(theta, psi, psi), psi)
        })
        .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc });
    let mut starts: Vec<(f64, f64, f64)> = seeds
        .iter()
        .take(LIMIT_STARTS)
        .map(|&(v, a, b)| (a as f64 * step, b as f64 * step, v))
        .collect();
    starts.push((diag.1, diag.1, diag.0));
    if diag.0 < best.2 {
        best = (diag.1, diag.1, diag.0);
    }
    for &(s0, t0, v) in &starts {
        let r = refine(theta, s0, t0, v, tol);
        if r.2 < best.2 {
            best = r;
        }
    }
    Ok(LimitConstant {
        value: best.2,
        argmin_angles: (best.0, best.1),
        tolerance: tol,
    })
}

/// Boundary handling for the univariate closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    /// `tridiag(rho, 1, rho)` / `T(rho, 1, rho)`.
    Toeplitz,
    /// `circ(rho, 1, rho)` / `C(rho, 1, rho)`.
    Circulant,
}

/// `min_k cos(2 pi k / n)` for `rho > 0`, `max_k` (= 1) otherwise: the
/// extreme cosine selected by the sign of the coupling.
fn circulant_extreme_cos(n: usize) -> f64 {
    if n % 2 == 0 {
        -1.0
    } else {
        cos(TAU * floor(n as f64 / 2.0) / n as f64)
    }
}

/// Smallest eigenvalue of the transect precision of length `n`.
pub fn transect_eigs(rho: f64, n: usize, kind: LatticeKind) -> Result<f64> {
    match kind {
        LatticeKind::Toeplitz => {
            if n < 2 {
                return Err(Error::InvalidSize { n, min: 2 });
            }
            Ok(1.0 - 2.0 * rho.abs() * cos(PI / (n as f64 + 1.0)))
        }
        LatticeKind::Circulant => {
            if n < 3 {
                return Err(Error::InvalidSize { n, min: 3 });
            }
            if rho <= 0.0 {
                Ok(1.0 - 2.0 * rho.abs())
            } else {
                Ok(1.0 + 2.0 * rho * circulant_extreme_cos(n))
            }
        }
    }
}

/// Smallest eigenvalue of `T(rho, 1, rho)` or `C(rho, 1, rho)` on `dims`.
pub fn lattice_min_eig(rho: f64, dims: GridDims, kind: LatticeKind) -> f64 {
    let (n1, n2) = (dims.n1() as f64, dims.n2() as f64);
    match kind {
        LatticeKind::Toeplitz => {
            1.0 - 2.0 * rho.abs() * (cos(PI / (n1 + 1.0)) + cos(PI / (n2 + 1.0)))
        }
        LatticeKind::Circulant => {
            if rho <= 0.0 {
                1.0 - 4.0 * rho.abs()
            } else {
                1.0 + 2.0 * rho * (circulant_extreme_cos(dims.n1()) + circulant_extreme_cos(dims.n2()))
            }
        }
    }
}

/// Row of the spectrum dump, one per Fourier mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub i: usize,
    pub j: usize,
    pub lam11: f64,
    pub lam22: f64,
    pub lam12: Complex64,
    pub lam_minus: f64,
    pub lam_plus: f64,
}

/// Per-mode table in row-major `(i, j)` order.
pub fn spectrum_rows(theta: &Theta, dims: GridDims) -> Vec<SpectrumRow> {
    let grid = SpectralGrid::new(theta, dims);
    let spec = perturbed_spectrum(theta, dims);
    (0..dims.n())
        .map(|k| SpectrumRow {
            i: k / dims.n1(),
            j: k % dims.n1(),
            lam11: grid.lam11[k],
            lam22: grid.lam22[k],
            lam12: grid.lam12[k],
            lam_minus: spec.minus[k],
            lam_plus: spec.plus[k],
        })
        .collect()
}
