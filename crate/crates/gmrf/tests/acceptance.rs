//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Dense spectra below come from nalgebra directly, independent of the
//! library's own oracle module.

use std::time::Instant;

use gmrf::bench::{bench_membership, BenchConfig, Case, Path};
use gmrf::parallel::{sample_parallel, sweep_parallel};
use gmrf_core::precision::{perturbation_nnz_bound, precision_nnz_bound};
use gmrf_core::sampler::{Budget, SampleBox, SamplerConfig};
use gmrf_core::spectrum::{exact_symmetric_spectrum, min_eig_perturbed, perturbed_spectrum, Scan};
use gmrf_core::study::{fit_loglog, fit_loglog_points, lattice_eps, quantile, select_study_thetas, transect_eps, Field};
use gmrf_core::validity::{certified_check, circulant_check, dd_holds, Method};
use gmrf_core::{build_bundle, build_inner_precision, GridDims, LanczosConfig, SparseSymMatrix, Theta};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn dims(n1: usize, n2: usize) -> GridDims {
    GridDims::new(n1, n2).unwrap()
}

fn random_theta(rng: &mut ChaCha8Rng, scale: f64) -> Theta {
    let mut a = [0.0; 5];
    for v in &mut a {
        *v = rng.random_range(-scale..scale);
    }
    Theta::from_array(a).unwrap()
}

fn dense_eigs(m: &SparseSymMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for &(r, c, v) in m.entries() {
        a[(r, c)] = v;
        a[(c, r)] = v;
    }
    let mut e: Vec<f64> = a.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_spectral_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for &(n1, n2) in &[(3, 3), (3, 4), (4, 5), (5, 6)] {
        for _ in 0..200 {
            let theta = random_theta(&mut rng, 1.0);
            let d = dims(n1, n2);
            let closed = perturbed_spectrum(&theta, d).sorted();
            let dense = dense_eigs(&build_bundle(&theta, d).unwrap().q_tilde);
            worst = worst.max(max_diff(&closed, &dense));
        }
    }
    verdict(worst < 1e-10, format!("max |closed - dense| = {worst:.2e} over 800 cases (tol 1e-10)"))
}

fn c2_symmetric_exactness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst: f64 = 0.0;
    let grids = [(3, 3), (3, 6), (4, 5), (5, 6), (6, 6)];
    for k in 0..100 {
        let mut theta = random_theta(&mut rng, 1.0);
        theta.rho21 = theta.rho12;
        let (n1, n2) = grids[k % grids.len()];
        let d = dims(n1, n2);
        let closed = exact_symmetric_spectrum(&theta, d).unwrap();
        worst = worst.max(max_diff(&closed, &dense_eigs(&build_inner_precision(&theta, d).unwrap())));
    }
    verdict(worst < 1e-10, format!("max |closed - dense| = {worst:.2e} over 100 cases (tol 1e-10)"))
}

fn c3_interlacing() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut violations = 0;
    let mut min_gap = f64::INFINITY;
    for &(n1, n2) in &[(4, 5), (6, 7)] {
        for _ in 0..500 {
            let theta = random_theta(&mut rng, 1.0);
            let d = dims(n1, n2);
            let lower = min_eig_perturbed(&theta, d.doubled(), Scan::Full);
            let lam = dense_eigs(&build_inner_precision(&theta, d).unwrap())[0];
            min_gap = min_gap.min(lam - lower);
            if lower > lam + 1e-9 {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0,
        format!("{violations} violations in 1000 cases; min lambda(Q) - bound = {min_gap:.3e}"),
    )
}

fn c4_no_false_positives() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let d = dims(6, 7);
    let (mut certified, mut violations) = (0, 0);
    // Half from the full box, half from a smaller cube where certificates are common.
    for k in 0..10_000 {
        let theta = random_theta(&mut rng, if k % 2 == 0 { 1.0 } else { 0.35 });
        if certified_check(&theta, d).unwrap().valid.is_valid() {
            certified += 1;
            if dense_eigs(&build_inner_precision(&theta, d).unwrap())[0] <= 0.0 {
                violations += 1;
            }
        }
    }
    verdict(
        violations == 0 && certified > 0,
        format!("{violations} false positives among {certified} certified of 10000 draws"),
    )
}

struct StudyData {
    report: gmrf_core::study::SweepReport,
    thetas: Vec<Theta>,
    seconds: f64,
}

fn run_study() -> StudyData {
    let start = Instant::now();
    let mut grids = vec![dims(10, 10)];
    grids.extend((20..=80).step_by(2).map(|s| dims(s, s)));
    let thetas = select_study_thetas(20, 2024, dims(160, 160), 1e-10).unwrap();
    let report = sweep_parallel(&thetas, &grids, &LanczosConfig::default(), 1e-10, 1).unwrap();
    StudyData {
        report,
        thetas,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn c5_convergence(s: &StudyData) -> Outcome {
    let checkpoints = [10, 20, 40, 80];
    let mut bad = Vec::new();
    let mut worst_last: f64 = 0.0;
    for k in 0..s.thetas.len() {
        let eps: Vec<f64> = checkpoints
            .iter()
            .map(|&side| s.report.for_theta(k).find(|r| r.dims == dims(side, side)).map_or(f64::NAN, |r| r.eps))
            .collect();
        worst_last = worst_last.max(eps[3]);
        let decreasing = eps.windows(2).all(|w| w[1] < w[0]);
        if !(eps[3] < 1e-3 && (decreasing || eps[3] < eps[0])) {
            bad.push(format!("theta {k}: {eps:?}"));
        }
    }
    verdict(
        bad.is_empty() && s.report.skips.is_empty(),
        format!(
            "20 thetas, max eps at 80x80 = {worst_last:.2e} (tol 1e-3), {} skips{}",
            s.report.skips.len(),
            if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join(", ")) }
        ),
    )
}

fn c6_delta_slopes(s: &StudyData) -> Outcome {
    let mut slopes = Vec::new();
    let mut min_r2 = f64::INFINITY;
    let mut bad = Vec::new();
    for k in 0..s.thetas.len() {
        let recs = s.report.for_theta(k).filter(|r| r.dims.n1() >= 20);
        let f = match fit_loglog(recs, Field::Delta) {
            Ok(f) => f,
            Err(e) => {
                bad.push(format!("theta {k}: {e}"));
                continue;
            }
        };
        slopes.push(f.slope);
        min_r2 = min_r2.min(f.r_squared);
        if !(f.r_squared >= 0.99 && (-1.15..=-0.85).contains(&f.slope)) {
            bad.push(format!("theta {k}: slope {:.4} R2 {:.5}", f.slope, f.r_squared));
        }
    }
    slopes.sort_by(f64::total_cmp);
    verdict(
        bad.is_empty() && slopes.len() == 20,
        format!(
            "median slope {:.4}, quartiles {:.4} / {:.4}, range [{:.4}, {:.4}], min R2 {:.5}; sweep {:.0}s{}",
            quantile(&slopes, 0.5),
            quantile(&slopes, 0.25),
            quantile(&slopes, 0.75),
            slopes.first().copied().unwrap_or(f64::NAN),
            slopes.last().copied().unwrap_or(f64::NAN),
            min_r2,
            s.seconds,
            if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join(", ")) }
        ),
    )
}

fn c7_univariate_rates() -> Outcome {
    let sizes: Vec<usize> = (6..=12).map(|k| (1usize << k) + 1).collect();
    let xs: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let neg: Vec<f64> = sizes.iter().map(|&n| transect_eps(-0.4, n).unwrap()).collect();
    let pos: Vec<f64> = sizes.iter().map(|&n| transect_eps(0.4, n).unwrap()).collect();
    let s_neg = fit_loglog_points(&xs, &neg).unwrap().slope;
    let s_pos = fit_loglog_points(&xs, &pos).unwrap().slope;
    let lat: Vec<f64> = sizes.iter().map(|&n| lattice_eps(-0.2, dims(n, n))).collect();
    let ns: Vec<f64> = sizes.iter().map(|&n| (n * n) as f64).collect();
    let s_lat = fit_loglog_points(&ns, &lat).unwrap().slope;
    verdict(
        (s_neg + 2.0).abs() <= 0.1 && (s_pos + 3.0).abs() <= 0.15 && (s_lat + 1.0).abs() <= 0.1,
        format!("transect rho=-0.4 slope {s_neg:.4} (-2 +/- 0.1), rho=0.4 odd slope {s_pos:.4} (-3 +/- 0.15), lattice rho<0 slope {s_lat:.4} (-1 +/- 0.1)"),
    )
}

fn c8_dd_coverage() -> Outcome {
    let start = Instant::now();
    let d = dims(100, 100);
    let cfg = SamplerConfig::new(d, Method::Circulant, 8);
    let batch = sample_parallel(&cfg, Budget::Accepted(100_000), 1).unwrap();
    let ratio = batch.dd_ratio();
    let certified: Vec<bool> = batch
        .accepted_draws()
        .filter(|x| certified_check(&x.theta, d).unwrap().valid.is_valid())
        .map(|x| x.dd_valid)
        .collect();
    let cert_ratio = certified.iter().filter(|&&b| b).count() as f64 / certified.len() as f64;
    verdict(
        (0.109..=0.149).contains(&ratio),
        format!(
            "DD/circulant-valid = {ratio:.4} ({} / {}), acceptance {:.5}; DD/certified-valid = {cert_ratio:.4} ({} certified); {:.0}s",
            batch.accepted_dd,
            batch.accepted,
            batch.acceptance_rate(),
            certified.len(),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn c9_slices() -> Outcome {
    let d = dims(50, 50);
    // Conditioning points: (phi, rho11, rho22) of the first valid uniform draws.
    let anchors = sample_parallel(&SamplerConfig::new(d, Method::Circulant, 9), Budget::Accepted(4), 1).unwrap();
    let mut zero_dd = 0;
    let mut asymmetric = 0;
    let mut dd_symmetric = true;
    let mut lines = Vec::new();
    for a in anchors.accepted_draws() {
        let t = a.theta;
        let mut cfg = SamplerConfig::new(d, Method::Circulant, 90);
        cfg.bounds = SampleBox::slice(t.phi, t.rho11, t.rho22);
        let slice = sample_parallel(&cfg, Budget::Proposed(10_000), 1).unwrap();
        if slice.accepted_dd == 0 {
            zero_dd += 1;
        }
        let mut unmatched = 0;
        for p in slice.accepted_draws() {
            let mut neg = p.theta;
            neg.rho12 = -neg.rho12;
            neg.rho21 = -neg.rho21;
            if p.dd_valid && !dd_holds(&neg) {
                dd_symmetric = false;
            }
            if !circulant_check(&neg, d, 0.0).unwrap().valid.is_valid() {
                unmatched += 1;
            }
        }
        if unmatched > 0 {
            asymmetric += 1;
        }
        lines.push(format!(
            "({:.3},{:.3},{:.3}): {} valid, {} DD, {} without mirror",
            t.phi, t.rho11, t.rho22, slice.accepted, slice.accepted_dd, unmatched
        ));
    }
    verdict(
        zero_dd >= 1 && asymmetric >= 1 && dd_symmetric,
        format!("{zero_dd} slices with no DD coverage, {asymmetric} asymmetric, DD symmetric: {dd_symmetric}; {}", lines.join("; ")),
    )
}

fn c10_benchmark() -> Outcome {
    let cfg = BenchConfig {
        n_valid: 0,
        n_invalid: 20,
        seed: 10,
        reps: 20,
        lanczos: LanczosConfig::default(),
    };
    let rows = bench_membership(&[dims(100, 100), dims(200, 200)], &cfg).unwrap();
    let ratio = |side: usize| {
        rows.iter()
            .find(|r| r.dims == dims(side, side) && r.case == Case::Invalid && r.method == Path::Baseline)
            .unwrap()
            .ratio
    };
    let (r100, r200) = (ratio(100), ratio(200));
    verdict(
        r100 > 3.0 && r200 > r100,
        format!("invalid-theta median ratio baseline/fast: {r100:.1} at 100x100, {r200:.1} at 200x200"),
    )
}

fn c11_structure() -> Outcome {
    let theta = Theta::new(0.3, -0.2, 0.15, 0.1, 0.25).unwrap();
    let mut notes = Vec::new();
    let mut ok = true;
    for &(n1, n2) in &[(3, 3), (4, 4), (4, 6), (7, 5), (10, 12)] {
        let d = dims(n1, n2);
        let b = build_bundle(&theta, d).unwrap();
        let q_ok = b.q.nnz() == precision_nnz_bound(d) && precision_nnz_bound(d) == 20 * d.n() - 8 * n1 - 8 * n2;
        let dq_ok = b.delta_q.nnz() <= perturbation_nnz_bound(d) && perturbation_nnz_bound(d) == 8 * (n1 + n2);
        let tr_ok = b.delta_q.trace() == 0.0;
        ok &= q_ok && dq_ok && tr_ok;
        notes.push(format!("{d}: nnz(Q)={} nnz(dQ)={} tr(dQ)={}", b.q.nnz(), b.delta_q.nnz(), b.delta_q.trace()));
    }
    let e = dense_eigs(&build_bundle(&theta, dims(4, 4)).unwrap().delta_q);
    let indefinite = e[0] < -1e-12 && e[e.len() - 1] > 1e-12;
    ok &= indefinite;
    notes.push(format!("dQ at 4x4 spans [{:.4}, {:.4}]", e[0], e[e.len() - 1]));
    verdict(ok, notes.join("; "))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, outcome: Outcome| {
        match &outcome {
            Ok(detail) => println!("PASS [{id:>2}] {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{id:>2}] {name}: {detail}");
            }
        }
    };
    report(1, "spectral exactness", c1_spectral_exactness());
    report(2, "symmetric-case exactness", c2_symmetric_exactness());
    report(3, "interlacing soundness", c3_interlacing());
    report(4, "no false positives", c4_no_false_positives());
    let study = run_study();
    report(5, "convergence of lambda_min(Q) - lambda_min(Q~)", c5_convergence(&study));
    report(6, "delta slope study", c6_delta_slopes(&study));
    report(7, "univariate parity rates", c7_univariate_rates());
    report(8, "DD coverage ratio", c8_dd_coverage());
    report(9, "conditional slices", c9_slices());
    report(10, "benchmark property", c10_benchmark());
    report(11, "structural invariants", c11_structure());
    println!("{} of 11 criteria passed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
