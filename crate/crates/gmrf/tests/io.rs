use gmrf::io::*;
use gmrf_core::sampler::{run_sequential, Budget, SamplerConfig};
use gmrf_core::validity::{circulant_check, Method};
use gmrf_core::{build_bundle, build_precision, GridDims, Tau, Theta};

fn dims(n1: usize, n2: usize) -> GridDims {
    GridDims::new(n1, n2).unwrap()
}

#[test]
fn matrix_market_round_trip() {
    let theta = Theta::new(0.3, -0.2, 0.15, 0.05, 0.1).unwrap();
    let b = build_bundle(&theta, dims(4, 5)).unwrap();
    for m in [b.q, b.q_tilde, b.delta_q, build_precision(&theta, Tau::new(0.5, 2.0).unwrap(), dims(3, 3)).unwrap()] {
        let mut buf = Vec::new();
        write_matrix_market(&mut buf, &m).unwrap();
        let back = read_matrix_market(&buf[..]).unwrap();
        assert_eq!(back, m);
    }
}

#[test]
fn matrix_market_general_input_is_folded() {
    let text = "%%MatrixMarket matrix coordinate real general\n% comment\n2 2 4\n1 1 2.0\n1 2 0.5\n2 1 0.5\n2 2 3.0\n";
    let m = read_matrix_market(text.as_bytes()).unwrap();
    assert_eq!((m.get(0, 1), m.get(1, 0), m.get(1, 1)), (0.5, 0.5, 3.0));
    assert!(read_matrix_market("%%MatrixMarket matrix array real general\n".as_bytes()).is_err());
    assert!(read_matrix_market("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n0 1 1.0\n".as_bytes()).is_err());
}

#[test]
fn batch_csv_reparses() {
    let mut cfg = SamplerConfig::new(dims(6, 6), Method::Circulant, 4);
    cfg.keep_rejected = true;
    let batch = run_sequential(&cfg, Budget::Proposed(300)).unwrap();
    let mut buf = Vec::new();
    write_batch_csv(&mut buf, &batch).unwrap();
    let mut r = csv::Reader::from_reader(&buf[..]);
    assert_eq!(r.headers().unwrap().iter().collect::<Vec<_>>(), BATCH_HEADER);
    for (rec, d) in r.records().zip(&batch.draws) {
        let rec = rec.unwrap();
        assert_eq!(rec[0].parse::<u64>().unwrap(), d.idx);
        let theta = Theta::new(
            rec[1].parse().unwrap(),
            rec[2].parse().unwrap(),
            rec[3].parse().unwrap(),
            rec[4].parse().unwrap(),
            rec[5].parse().unwrap(),
        )
        .unwrap();
        assert_eq!(theta, d.theta);
        assert_eq!(&rec[6], d.valid.as_str());
        assert_eq!(rec[7].parse::<bool>().unwrap(), d.dd_valid);
        assert_eq!(rec[8].parse::<f64>().unwrap(), d.min_eig);
    }
}

#[test]
fn verdict_json_fields() {
    let v = circulant_check(&Theta::new(0.5, 0.0, 0.0, 0.0, 0.0).unwrap(), dims(10, 10), 0.0).unwrap();
    let j = verdict_json(&v);
    assert_eq!(j["method"], "circulant");
    assert_eq!(j["valid"], "true");
    assert_eq!(j["n1"], 10);
    assert_eq!(j["theta"]["phi"], 0.5);
    assert_eq!(j["elapsed_ns"], 0);
}
