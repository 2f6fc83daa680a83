use gmrf_core::sampler::*;
use gmrf_core::validity::{exact_check, Method};
use gmrf_core::{GridDims, LanczosConfig};

fn dims(n1: usize, n2: usize) -> GridDims {
    GridDims::new(n1, n2).unwrap()
}

#[test]
fn tiny_box_accepts_everything() {
    let mut cfg = SamplerConfig::new(dims(10, 10), Method::DiagDominance, 1);
    cfg.bounds = SampleBox::cube(0.01);
    let b = run_sequential(&cfg, Budget::Accepted(500)).unwrap();
    assert_eq!(b.acceptance_rate(), 1.0);
    assert_eq!(b.accepted_dd, 500);
    assert!(b.draws.iter().all(|d| d.theta.to_array().iter().all(|v| v.abs() <= 0.01)));
}

#[test]
fn same_seed_same_batch() {
    let a = sample_valid(dims(12, 12), 50, Method::Circulant, 42).unwrap();
    let b = sample_valid(dims(12, 12), 50, Method::Circulant, 42).unwrap();
    assert_eq!(a, b);
    let c = sample_valid(dims(12, 12), 50, Method::Circulant, 43).unwrap();
    assert_ne!(a.draws, c.draws);
    assert_eq!(a.accepted, 50);
    assert!(a.draws.windows(2).all(|w| w[0].idx < w[1].idx));
}

#[test]
fn chunk_merging_is_order_independent_of_evaluation() {
    let mut cfg = SamplerConfig::new(dims(8, 8), Method::Certified, 9);
    cfg.keep_rejected = true;
    let seq = run_sequential(&cfg, Budget::Proposed(3 * CHUNK as u64 + 17)).unwrap();
    // Evaluate chunks out of order, then merge in order.
    let mut chunks: Vec<ChunkResult> = [3, 1, 0, 2].iter().map(|&c| evaluate_chunk(&cfg, c).unwrap()).collect();
    chunks.sort_by_key(|c| c.chunk);
    let mut m = Merger::new(cfg, Budget::Proposed(3 * CHUNK as u64 + 17)).unwrap();
    for c in chunks {
        m.push(c).unwrap();
    }
    assert!(m.is_done());
    assert_eq!(m.finish().unwrap(), seq);
    assert_eq!(seq.draws.len(), 3 * CHUNK + 17);
}

#[test]
fn rejects_out_of_order_chunks_and_empty_budgets() {
    let cfg = SamplerConfig::new(dims(8, 8), Method::Circulant, 1);
    let mut m = Merger::new(cfg, Budget::Accepted(10)).unwrap();
    assert!(m.push(evaluate_chunk(&cfg, 1).unwrap()).is_err());
    assert!(Merger::new(cfg, Budget::Accepted(0)).is_err());
}

#[test]
fn aborts_when_acceptance_is_hopeless() {
    let mut cfg = SamplerConfig::new(dims(8, 8), Method::Circulant, 1);
    cfg.bounds = SampleBox { lo: [2.0, 0.0, 0.0, 0.0, 0.0], hi: [3.0, 0.0, 0.0, 0.0, 0.0] };
    cfg.warmup = 5000;
    match run_sequential(&cfg, Budget::Accepted(1)) {
        Err(gmrf_core::Error::AcceptanceTooLow { accepted: 0, proposed }) => assert!(proposed >= 5000),
        other => panic!("{other:?}"),
    }
}

#[test]
fn certified_draws_pass_the_exact_test() {
    let b = sample_valid(dims(6, 7), 300, Method::Certified, 5).unwrap();
    for d in b.accepted_draws() {
        assert!(exact_check(&d.theta, b.dims, 0.0, &LanczosConfig::default()).unwrap().valid.is_valid());
    }
}

#[test]
fn acceptance_rates_are_ordered_by_method_strength() {
    let d = dims(10, 10);
    let rate = |m| {
        let mut cfg = SamplerConfig::new(d, m, 77);
        cfg.bounds = SampleBox::cube(0.5);
        run_sequential(&cfg, Budget::Proposed(20_000)).unwrap().acceptance_rate()
    };
    let (dd, cert, circ) = (rate(Method::DiagDominance), rate(Method::Certified), rate(Method::Circulant));
    assert!(dd <= cert && cert <= circ, "{dd} {cert} {circ}");
}

#[test]
fn slice_symmetries_at_the_origin() {
    let b = sample_conditional_slice(0.0, 0.0, 0.0, dims(20, 20), 4000, 3).unwrap();
    assert_eq!(b.proposed, 4000);
    for d in b.accepted_draws() {
        assert_eq!((d.theta.phi, d.theta.rho11, d.theta.rho22), (0.0, 0.0, 0.0));
        let mut swapped = d.theta;
        std::mem::swap(&mut swapped.rho12, &mut swapped.rho21);
        let mut flipped = d.theta;
        flipped.rho12 = -flipped.rho12;
        flipped.rho21 = -flipped.rho21;
        for t in [swapped, flipped] {
            let v = gmrf_core::validity::circulant_check(&t, b.dims, 0.0).unwrap();
            assert!(v.valid.is_valid());
            assert!((v.min_eig_evidence - d.min_eig).abs() < 1e-12);
        }
    }
}
