//! Uniform rejection sampling of parameter vectors.
//!
//! Proposals come in chunks of [`CHUNK`]: chunk `c` is drawn from ChaCha8
//! seeded with `seed` on stream `c`, so proposal `k` is the same value no
//! matter how chunks are distributed over workers. Merging evaluated chunks in
//! index order therefore reproduces the sequential result exactly.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::params::{GridDims, Theta};
use crate::validity::{check, dd_holds, CheckOptions, Method, Validity};

/// Proposals per RNG stream.
pub const CHUNK: usize = 4096;

/// Per-coordinate bounds in `(phi, rho11, rho12, rho21, rho22)` order.
/// Equal bounds pin a coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleBox {
    pub lo: [f64; 5],
    pub hi: [f64; 5],
}

impl Default for SampleBox {
    fn default() -> Self {
        SampleBox::cube(1.0)
    }
}

impl SampleBox {
    /// `[-r, r]^5`.
    pub fn cube(r: f64) -> Self {
        SampleBox {
            lo: [-r; 5],
            hi: [r; 5],
        }
    }

    /// `(phi, rho11, rho22)` fixed, `(rho12, rho21)` free on `[-1, 1]^2`.
    pub fn slice(phi: f64, rho11: f64, rho22: f64) -> Self {
        SampleBox {
            lo: [phi, rho11, -1.0, -1.0, rho22],
            hi: [phi, rho11, 1.0, 1.0, rho22],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for k in 0..5 {
            if !(self.lo[k].is_finite() && self.hi[k].is_finite() && self.lo[k] <= self.hi[k]) {
                return Err(Error::InvalidConfig("sample box bounds must be finite with lo <= hi"));
            }
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Theta {
        let mut a = [0.0; 5];
        for (k, v) in a.iter_mut().enumerate() {
            let u: f64 = rng.random();
            *v = self.lo[k] + (self.hi[k] - self.lo[k]) * u;
        }
        Theta {
            phi: a[0],
            rho11: a[1],
            rho12: a[2],
            rho21: a[3],
            rho22: a[4],
        }
    }
}

/// The proposals of chunk `chunk`, tagged with their global index.
pub fn propose_chunk(seed: u64, chunk: u64, bounds: &SampleBox) -> impl Iterator<Item = (u64, Theta)> + '_ {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let base = chunk * CHUNK as u64;
    (0..CHUNK as u64).map(move |k| (base + k, bounds.draw(&mut rng)))
}

/// One evaluated proposal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    /// Global proposal index.
    pub idx: u64,
    pub theta: Theta,
    pub valid: Validity,
    /// Weak diagonal dominance on the sampled lattice.
    pub dd_valid: bool,
    /// Evidence reported by the validity method.
    pub min_eig: f64,
}

/// Rejection sampler settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub dims: GridDims,
    pub method: Method,
    pub seed: u64,
    pub bounds: SampleBox,
    pub options: CheckOptions,
    /// Also record draws the method did not accept.
    pub keep_rejected: bool,
    /// Proposals evaluated before the acceptance floor is enforced.
    pub warmup: u64,
    /// Abort when the acceptance rate stays below this after warm-up.
    pub min_rate: f64,
}

impl SamplerConfig {
    pub fn new(dims: GridDims, method: Method, seed: u64) -> Self {
        SamplerConfig {
            dims,
            method,
            seed,
            bounds: SampleBox::default(),
            options: CheckOptions::default(),
            keep_rejected: false,
            warmup: 100_000,
            min_rate: 1e-4,
        }
    }
}

/// What to stop on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Stop once this many proposals were accepted.
    Accepted(u64),
    /// Evaluate exactly this many proposals.
    Proposed(u64),
}

impl Budget {
    fn validate(self) -> Result<()> {
        match self {
            Budget::Accepted(0) | Budget::Proposed(0) => Err(Error::InvalidConfig("n_draws must be at least 1")),
            _ => Ok(()),
        }
    }
}

/// Evaluated chunk, before merging.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkResult {
    pub chunk: u64,
    pub draws: Vec<Draw>,
}

/// Evaluates every proposal of one chunk, keeping all of them.
pub fn evaluate_chunk(cfg: &SamplerConfig, chunk: u64) -> Result<ChunkResult> {
    let mut draws = Vec::with_capacity(CHUNK);
    for (idx, theta) in propose_chunk(cfg.seed, chunk, &cfg.bounds) {
        let verdict = check(cfg.method, &theta, cfg.dims, &cfg.options)?;
        draws.push(Draw {
            idx,
            theta,
            valid: verdict.valid,
            dd_valid: dd_holds(&theta),
            min_eig: verdict.min_eig_evidence,
        });
    }
    Ok(ChunkResult { chunk, draws })
}

/// Accepted (and optionally rejected) draws in proposal order.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub draws: Vec<Draw>,
    pub seed: u64,
    pub dims: GridDims,
    pub bounds: SampleBox,
    pub method: Method,
    pub proposed: u64,
    pub accepted: u64,
    /// Accepted draws that are also diagonally dominant.
    pub accepted_dd: u64,
}

impl SampleBatch {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposed as f64
    }

    /// `#DD-valid / #valid` among accepted draws.
    pub fn dd_ratio(&self) -> f64 {
        self.accepted_dd as f64 / self.accepted as f64
    }

    pub fn accepted_draws(&self) -> impl Iterator<Item = &Draw> {
        self.draws.iter().filter(|d| d.valid.is_valid())
    }
}

/// Folds chunk results, given in chunk order, into a batch.
#[derive(Debug, Clone)]
pub struct Merger {
    cfg: SamplerConfig,
    budget: Budget,
    batch: SampleBatch,
    next_chunk: u64,
    done: bool,
}

impl Merger {
    pub fn new(cfg: SamplerConfig, budget: Budget) -> Result<Self> {
        budget.validate()?;
        cfg.bounds.validate()?;
        Ok(Merger {
            cfg,
            budget,
            batch: SampleBatch {
                draws: Vec::new(),
                seed: cfg.seed,
                dims: cfg.dims,
                bounds: cfg.bounds,
                method: cfg.method,
                proposed: 0,
                accepted: 0,
                accepted_dd: 0,
            },
            next_chunk: 0,
            done: false,
        })
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Index of the next chunk [`Merger::push`] expects.
    pub fn next_chunk(&self) -> u64 {
        self.next_chunk
    }

    /// Absorbs the next chunk. Chunks must arrive in order; extra chunks after
    /// completion are ignored.
    pub fn push(&mut self, chunk: ChunkResult) -> Result<()> {
        if self.done {
            return Ok(());
        }
        if chunk.chunk != self.next_chunk {
            return Err(Error::InvalidConfig("chunks must be merged in index order"));
        }
        self.next_chunk += 1;
        for d in chunk.draws {
            if let Budget::Proposed(p) = self.budget {
                if self.batch.proposed >= p {
                    self.done = true;
                    break;
                }
            }
            self.batch.proposed += 1;
            let accepted = d.valid.is_valid();
            if accepted {
                self.batch.accepted += 1;
                self.batch.accepted_dd += d.dd_valid as u64;
            }
            if accepted || self.cfg.keep_rejected {
                self.batch.draws.push(d);
            }
            if let Budget::Accepted(a) = self.budget {
                if self.batch.accepted >= a {
                    self.done = true;
                    break;
                }
            }
        }
        if let Budget::Proposed(p) = self.budget {
            self.done |= self.batch.proposed >= p;
        }
        let b = &self.batch;
        if !self.done && b.proposed >= self.cfg.warmup && (b.accepted as f64) < self.cfg.min_rate * b.proposed as f64 {
            return Err(Error::AcceptanceTooLow {
                accepted: b.accepted,
                proposed: b.proposed,
            });
        }
        Ok(())
    }

    pub fn finish(self) -> Result<SampleBatch> {
        let b = &self.batch;
        if let Budget::Proposed(_) = self.budget {
            if b.proposed >= self.cfg.warmup && (b.accepted as f64) < self.cfg.min_rate * b.proposed as f64 {
                return Err(Error::AcceptanceTooLow {
                    accepted: b.accepted,
                    proposed: b.proposed,
                });
            }
        }
        Ok(self.batch)
    }
}

/// Runs chunks sequentially until the budget is met.
pub fn run_sequential(cfg: &SamplerConfig, budget: Budget) -> Result<SampleBatch> {
    let mut merger = Merger::new(*cfg, budget)?;
    while !merger.is_done() {
        let chunk = evaluate_chunk(cfg, merger.next_chunk())?;
        merger.push(chunk)?;
    }
    merger.finish()
}

/// Draws until `n_draws` proposals were accepted by `method`.
pub fn sample_valid(dims: GridDims, n_draws: u64, method: Method, seed: u64) -> Result<SampleBatch> {
    run_sequential(&SamplerConfig::new(dims, method, seed), Budget::Accepted(n_draws))
}

/// Fixes `(phi, rho11, rho22)` and proposes `n_draws` values of
/// `(rho12, rho21)` uniformly on `[-1, 1]^2`; the batch keeps the accepted ones.
pub fn sample_conditional_slice(
    phi: f64,
    rho11: f64,
    rho22: f64,
    dims: GridDims,
    n_draws: u64,
    seed: u64,
) -> Result<SampleBatch> {
    let mut cfg = SamplerConfig::new(dims, Method::Circulant, seed);
    cfg.bounds = SampleBox::slice(phi, rho11, rho22);
    run_sequential(&cfg, Budget::Proposed(n_draws))
}
