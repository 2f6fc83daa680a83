use gmrf_core::oracle::*;
use gmrf_core::spectrum::{min_eig_perturbed, Scan};
use gmrf_core::{build_bundle, build_inner_precision, GridDims, SparseSymMatrix, Theta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

fn random_theta(rng: &mut ChaCha8Rng, scale: f64) -> Theta {
    let mut a = [0.0; 5];
    for v in &mut a {
        *v = rng.random_range(-scale..scale);
    }
    Theta::from_array(a).unwrap()
}

fn dims(n1: usize, n2: usize) -> GridDims {
    GridDims::new(n1, n2).unwrap()
}

#[test]
fn matvec_identity_and_dense() {
    let v: Vec<f64> = (0..7).map(|k| k as f64 - 3.0).collect();
    assert_eq!(matvec(&SparseSymMatrix::identity(7), &v).unwrap(), v);
    assert!(matvec(&SparseSymMatrix::identity(6), &v).is_err());

    let q0 = build_inner_precision(&Theta::zero(), dims(4, 5)).unwrap();
    let w: Vec<f64> = (0..40).map(|k| (k as f64).sin()).collect();
    assert_eq!(matvec(&q0, &w).unwrap(), w);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let q = build_inner_precision(&random_theta(&mut rng, 1.0), dims(4, 5)).unwrap();
        let x: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let dense = q.to_dense();
        let y = matvec(&q, &x).unwrap();
        for r in 0..40 {
            let expect: f64 = (0..40).map(|c| dense[r * 40 + c] * x[c]).sum();
            assert!((y[r] - expect).abs() < 1e-14);
        }
    }
}

#[test]
fn gershgorin_bounds() {
    assert_eq!(gershgorin_upper(&SparseSymMatrix::identity(4)), 1.0);
    let rho = 0.15;
    let q = build_inner_precision(&Theta::new(0.0, rho, 0.0, 0.0, rho).unwrap(), dims(10, 10)).unwrap();
    assert!((gershgorin_upper(&q) - (1.0 + 4.0 * rho)).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let q = build_inner_precision(&random_theta(&mut rng, 1.0), dims(4, 4)).unwrap();
        let eig = dense_symmetric_spectrum(&q).unwrap();
        assert!(gershgorin_upper(&q) >= eig[eig.len() - 1] - 1e-12);
        assert!(gershgorin_lower(&q) <= eig[0] + 1e-12);
    }
}

#[test]
fn dense_spectra_known_cases() {
    let m = SparseSymMatrix::from_triplets(2, [(0, 0, 1.0), (1, 1, 0.5)]).unwrap();
    assert_eq!(dense_symmetric_spectrum(&m).unwrap(), vec![0.5, 1.0]);

    let (n, rho) = (9, -0.35);
    let t = SparseSymMatrix::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).chain((0..n - 1).map(|i| (i, i + 1, rho)))).unwrap();
    let mut expect: Vec<f64> = (1..=n).map(|k| 1.0 + 2.0 * rho * (k as f64 * PI / (n as f64 + 1.0)).cos()).collect();
    expect.sort_by(f64::total_cmp);
    for (a, b) in dense_symmetric_spectrum(&t).unwrap().iter().zip(&expect) {
        assert!((a - b).abs() < 1e-13);
    }
    assert!(matches!(
        dense_symmetric_spectrum(&SparseSymMatrix::identity(DENSE_CAP + 1)),
        Err(gmrf_core::Error::DimensionTooLarge { .. })
    ));

    // circ(x, y, z): y + z w^k + x w^-k
    let (x, y, z) = (0.3, 1.0, -0.2);
    let c = gmrf_core::SparseMatrix::from_triplets(
        n,
        (0..n).flat_map(|i| [(i, i, y), (i, (i + n - 1) % n, x), (i, (i + 1) % n, z)]),
    )
    .unwrap();
    let got = dense_general_spectrum(&c).unwrap();
    for k in 0..n {
        let w = num_complex::Complex64::from_polar(1.0, TAU * k as f64 / n as f64);
        let sym = y + z * w + x / w;
        assert!(got.iter().any(|e| (e - sym).norm() < 1e-12));
    }
}

#[test]
fn lanczos_identity() {
    let r = lanczos_extreme(&SparseSymMatrix::identity(50), &LanczosConfig::default(), Which::Smallest).unwrap();
    assert!((r.value - 1.0).abs() < 1e-14);
    assert!(r.iterations <= 2);
}

#[test]
fn lanczos_matches_dense_minimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = LanczosConfig::default();
    for _ in 0..50 {
        let q = build_inner_precision(&random_theta(&mut rng, 1.0), dims(6, 6)).unwrap();
        let dense = dense_symmetric_spectrum(&q).unwrap();
        let lo = lanczos_extreme(&q, &cfg, Which::Smallest).unwrap();
        let hi = lanczos_extreme(&q, &cfg, Which::Largest).unwrap();
        assert!((lo.value - dense[0]).abs() < 1e-8);
        assert!((hi.value - dense[dense.len() - 1]).abs() < 1e-8);
        assert!(lo.residual <= cfg.conv_tol);
    }
}

#[test]
fn lanczos_matches_closed_form_on_q_tilde() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let d = dims(12, 12);
    for _ in 0..10 {
        let theta = random_theta(&mut rng, 1.0);
        let qt = build_bundle(&theta, d).unwrap().q_tilde;
        let r = lanczos_extreme(&qt, &LanczosConfig::default(), Which::Smallest).unwrap();
        assert!((r.value - min_eig_perturbed(&theta, d, Scan::Full)).abs() < 1e-8);
    }
}

#[test]
fn lanczos_is_deterministic_in_seed() {
    let q = build_inner_precision(&Theta::new(0.2, 0.15, -0.1, 0.05, 0.1).unwrap(), dims(15, 20)).unwrap();
    let cfg = LanczosConfig { seed: 99, ..LanczosConfig::default() };
    let a = lanczos_extreme(&q, &cfg, Which::Smallest).unwrap();
    let b = lanczos_extreme(&q, &cfg, Which::Smallest).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.iterations, b.iterations);
}

#[test]
fn lanczos_reports_non_convergence() {
    let q = build_inner_precision(&Theta::new(0.2, 0.2, -0.1, 0.05, 0.2).unwrap(), dims(30, 30)).unwrap();
    let cfg = LanczosConfig { max_iter: 5, ..LanczosConfig::default() };
    match lanczos_extreme(&q, &cfg, Which::Smallest) {
        Err(gmrf_core::Error::NotConverged { iterations, residual, .. }) => {
            assert_eq!(iterations, 5);
            assert!(residual > cfg.conv_tol);
        }
        other => panic!("expected non-convergence, got {other:?}"),
    }
    assert!(lanczos_extreme(&q, &LanczosConfig { max_iter: 0, ..cfg }, Which::Smallest).is_err());
}

#[test]
fn rayleigh_quotient_is_minimal_at_ritz_vector() {
    let q = build_inner_precision(&Theta::new(-0.3, 0.2, 0.1, -0.15, 0.1).unwrap(), dims(10, 12)).unwrap();
    let r = lanczos_extreme(&q, &LanczosConfig::default(), Which::Smallest).unwrap();
    let v = r.vector.unwrap();
    let rq = |x: &[f64]| {
        let y = matvec(&q, x).unwrap();
        let num: f64 = y.iter().zip(x).map(|(a, b)| a * b).sum();
        num / x.iter().map(|a| a * a).sum::<f64>()
    };
    let base = rq(&v);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let w: Vec<f64> = (0..v.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!(rq(&w) >= base - 1e-8);
        let eps = 1e-3;
        let near: Vec<f64> = v.iter().zip(&w).map(|(a, b)| a + eps * b).collect();
        assert!(rq(&near) >= base - 1e-8);
    }
}

#[test]
fn perturbation_quadratic_form_bound() {
    // |<dQ u, u>| <= 8 K (n1 + n2) / (n1 n2) for the minimiser u of Q~.
    let theta = Theta::new(0.1, 0.2, -0.1, 0.15, 0.18).unwrap();
    for side in [10, 16, 24] {
        let d = dims(side, side + 2);
        let b = build_bundle(&theta, d).unwrap();
        let u = lanczos_extreme(&b.q_tilde, &LanczosConfig::default(), Which::Smallest).unwrap().vector.unwrap();
        let du = matvec(&b.delta_q, &u).unwrap();
        let form: f64 = du.iter().zip(&u).map(|(a, c)| a * c).sum();
        let k = b.delta_q.max_abs();
        let bound = 8.0 * k * (d.n1() + d.n2()) as f64 / d.n() as f64;
        assert!(form.abs() <= bound, "{form} > {bound} at {d}");
    }
}

#[test]
fn decision_mode_stops_early_for_negative_minimum() {
    let q = build_inner_precision(&Theta::new(0.9, 0.3, 0.2, -0.2, 0.3).unwrap(), dims(40, 40)).unwrap();
    let cfg = LanczosConfig::default();
    let (below, r) = lanczos_min_below(&q, &cfg, 0.0).unwrap();
    assert!(below);
    let full = lanczos_extreme(&q, &cfg, Which::Smallest).unwrap();
    assert!(r.iterations < full.iterations);
    assert!(full.value < 0.0 && r.value >= full.value - 1e-9);
}
