//! Timed checks and thread-pool drivers for the batch workloads.
//!
//! Work is split into independent units (sampler chunks, sweep pairs) and
//! results are merged in index order, so output does not depend on the
//! number of threads.

use std::time::Instant;

use gmrf_core::oracle::LanczosConfig;
use gmrf_core::sampler::{evaluate_chunk, Budget, Merger, SampleBatch, SamplerConfig};
use gmrf_core::study::{convergence_record, SweepReport, SweepSkip};
use gmrf_core::validity::{check, CheckOptions};
use gmrf_core::{limit_constant, Error, GridDims, Method, Result, Theta, ValidityVerdict};
use rayon::prelude::*;

/// Environment variable consulted when no thread count is given.
pub const THREADS_ENV: &str = "GMRF_THREADS";

/// Explicit count, else `GMRF_THREADS`, else the available parallelism.
pub fn resolve_threads(explicit: Option<usize>) -> usize {
    explicit
        .or_else(|| std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
}

/// [`check`] with the wall-clock time recorded in the verdict.
pub fn timed_check(method: Method, theta: &Theta, dims: GridDims, opts: &CheckOptions) -> Result<ValidityVerdict> {
    let start = Instant::now();
    let mut v = check(method, theta, dims, opts)?;
    v.elapsed = start.elapsed();
    Ok(v)
}

/// Rejection sampling with chunks evaluated concurrently.
pub fn sample_parallel(cfg: &SamplerConfig, budget: Budget, threads: usize) -> Result<SampleBatch> {
    let mut merger = Merger::new(*cfg, budget)?;
    let pool = pool(threads);
    let wave = (2 * threads).max(1) as u64;
    while !merger.is_done() {
        let first = merger.next_chunk();
        let chunks: Vec<_> = pool.install(|| {
            (first..first + wave)
                .into_par_iter()
                .map(|c| evaluate_chunk(cfg, c))
                .collect::<Result<Vec<_>>>()
        })?;
        for c in chunks {
            merger.push(c)?;
            if merger.is_done() {
                break;
            }
        }
    }
    merger.finish()
}

/// [`gmrf_core::study::convergence_sweep`] over a thread pool.
pub fn sweep_parallel(
    thetas: &[Theta],
    grids: &[GridDims],
    cfg: &LanczosConfig,
    limit_tol: f64,
    threads: usize,
) -> Result<SweepReport> {
    if grids.is_empty() {
        return Err(Error::InvalidConfig("grid list is empty"));
    }
    let pool = pool(threads);
    pool.install(|| {
        let limits: Vec<f64> = thetas
            .par_iter()
            .map(|t| limit_constant(t, limit_tol).map(|c| c.value))
            .collect::<Result<_>>()?;
        // Largest grids first keeps the tail short; results are re-sorted.
        let mut pairs: Vec<(usize, usize)> = (0..thetas.len()).flat_map(|k| (0..grids.len()).map(move |g| (k, g))).collect();
        pairs.sort_by_key(|&(k, g)| (std::cmp::Reverse(grids[g].n()), k, g));
        let mut out: Vec<(usize, usize, Result<_>)> = pairs
            .into_par_iter()
            .map(|(k, g)| (k, g, convergence_record(k, &thetas[k], limits[k], grids[g], cfg)))
            .collect();
        out.sort_by_key(|&(k, g, _)| (k, g));
        let mut report = SweepReport::default();
        for (k, g, r) in out {
            match r {
                Ok(rec) => report.records.push(rec),
                Err(e @ Error::NotConverged { .. }) => report.skips.push(SweepSkip {
                    theta_idx: k,
                    dims: grids[g],
                    error: e,
                }),
                Err(e) => return Err(e),
            }
        }
        Ok(report)
    })
}
