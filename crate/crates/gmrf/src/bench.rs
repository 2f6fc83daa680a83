//! Membership timing: closed-form check against assembly plus eigensolver.
//!
//! For valid parameters both paths assemble `Q`, since a caller needs it
//! afterwards anyway; the baseline then runs Lanczos to convergence. For
//! invalid parameters the fast path never assembles, and the baseline stops
//! as soon as a Ritz value proves `lambda_min(Q) < 0`.

use std::hint::black_box;
use std::time::Instant;

use gmrf_core::oracle::{lanczos_extreme, lanczos_min_below, LanczosConfig, Which};
use gmrf_core::sampler::{propose_chunk, SampleBox};
use gmrf_core::study::quantile;
use gmrf_core::validity::{certified_check, circulant_check};
use gmrf_core::{build_inner_precision, Error, GridDims, Result, Theta};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Case {
    Valid,
    Invalid,
}

impl Case {
    pub fn name(self) -> &'static str {
        match self {
            Case::Valid => "valid",
            Case::Invalid => "invalid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Path {
    Fast,
    Baseline,
}

impl Path {
    pub fn name(self) -> &'static str {
        match self {
            Path::Fast => "fast",
            Path::Baseline => "baseline",
        }
    }
}

/// One line of the benchmark table. `median_ns` is the median over
/// parameters of the per-parameter median time; `ratio` is the median over
/// parameters of `baseline / fast` (1 on the fast row).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub dims: GridDims,
    pub case: Case,
    pub method: Path,
    pub median_ns: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub n_valid: usize,
    pub n_invalid: usize,
    pub seed: u64,
    /// Timed repetitions per parameter, after one discarded warm-up run.
    pub reps: usize,
    pub lanczos: LanczosConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            n_valid: 0,
            n_invalid: 50,
            seed: 0,
            reps: 20,
            lanczos: LanczosConfig::default(),
        }
    }
}

fn median_ns(mut f: impl FnMut() -> Result<()>, reps: usize) -> Result<f64> {
    f()?;
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let t = Instant::now();
        f()?;
        times.push(t.elapsed().as_nanos() as f64);
    }
    times.sort_by(f64::total_cmp);
    Ok(quantile(&times, 0.5))
}

fn fast_path(theta: &Theta, dims: GridDims) -> Result<bool> {
    let v = circulant_check(theta, dims, 0.0)?;
    if v.valid.is_valid() {
        black_box(build_inner_precision(theta, dims)?);
    }
    Ok(black_box(v.valid.is_valid()))
}

fn baseline(theta: &Theta, dims: GridDims, cfg: &LanczosConfig) -> Result<bool> {
    let q = build_inner_precision(theta, dims)?;
    let (below, _) = lanczos_min_below(&q, cfg, 0.0)?;
    Ok(black_box(!below))
}

/// Uniform draws from `[-1, 1]^5`: valid ones certified on `dims`, invalid
/// ones confirmed by the baseline itself.
fn pick(dims: GridDims, cfg: &BenchConfig) -> Result<(Vec<Theta>, Vec<Theta>)> {
    let (mut valid, mut invalid) = (Vec::new(), Vec::new());
    let bounds = SampleBox::default();
    for chunk in 0..1u64 << 16 {
        for (_, theta) in propose_chunk(cfg.seed, chunk, &bounds) {
            if valid.len() >= cfg.n_valid && invalid.len() >= cfg.n_invalid {
                return Ok((valid, invalid));
            }
            if certified_check(&theta, dims)?.valid.is_valid() {
                if valid.len() < cfg.n_valid {
                    valid.push(theta);
                }
            } else if invalid.len() < cfg.n_invalid
                && !circulant_check(&theta, dims, 0.0)?.valid.is_valid()
                && !baseline(&theta, dims, &cfg.lanczos)?
            {
                invalid.push(theta);
            }
        }
    }
    Err(Error::InvalidConfig("could not find enough benchmark parameters"))
}

fn rows(dims: GridDims, case: Case, fast: &[f64], base: &[f64]) -> [BenchRow; 2] {
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v
    };
    let ratios: Vec<f64> = base.iter().zip(fast).map(|(b, f)| b / f).collect();
    let row = |method, med| BenchRow {
        dims,
        case,
        method,
        median_ns: med,
        ratio: 1.0,
    };
    let mut b = row(Path::Baseline, quantile(&sorted(base), 0.5));
    b.ratio = quantile(&sorted(&ratios), 0.5);
    [row(Path::Fast, quantile(&sorted(fast), 0.5)), b]
}

/// Times both membership paths on every grid. Run single-threaded.
pub fn bench_membership(dims_list: &[GridDims], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.n_valid + cfg.n_invalid == 0 || cfg.reps == 0 {
        return Err(Error::InvalidConfig("benchmark needs at least one parameter and one repetition"));
    }
    let mut out = Vec::new();
    for &dims in dims_list {
        let (valid, invalid) = pick(dims, cfg)?;
        for (case, set) in [(Case::Valid, &valid), (Case::Invalid, &invalid)] {
            if set.is_empty() {
                continue;
            }
            let (mut fast, mut base) = (Vec::new(), Vec::new());
            for theta in set {
                fast.push(median_ns(|| fast_path(theta, dims).map(drop), cfg.reps)?);
                base.push(match case {
                    Case::Valid => median_ns(
                        || {
                            let q = build_inner_precision(theta, dims)?;
                            black_box(lanczos_extreme(&q, &cfg.lanczos, Which::Smallest)?);
                            Ok(())
                        },
                        cfg.reps,
                    )?,
                    Case::Invalid => median_ns(|| baseline(theta, dims, &cfg.lanczos).map(drop), cfg.reps)?,
                });
            }
            out.extend(rows(dims, case, &fast, &base));
        }
    }
    Ok(out)
}
