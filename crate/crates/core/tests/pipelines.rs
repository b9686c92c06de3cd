use stcs_core::pipelines::{
    convolve_and_measure, identify_system, make_probe, make_pwc, read_vector_csv, recover_pwc, write_vector_csv,
    PipelineSummary,
};
use stcs_core::randgen::draw_rademacher_spikes;
use stcs_core::recovery::{omp, SolverConfig};
use stcs_core::{DistKind, DistributionSpec, MeasurementOperator, OperatorKind, SeedSpec, SparseSignal};

fn gauss(k: usize) -> DistributionSpec {
    DistributionSpec::new(DistKind::Gaussian, k).unwrap()
}

#[test]
fn probe_tail_is_mirrored() {
    let p = make_probe(512, 128, gauss(128), SeedSpec::new(1, 0)).unwrap();
    let a = p.full();
    assert_eq!(a.len(), 639);
    for t in 1..128 {
        assert_eq!(a[511 + t].to_bits(), a[511 - t].to_bits());
    }
    assert_eq!(p.free_part(), &a[..512]);
    assert!(make_probe(4, 5, gauss(5), SeedSpec::default()).is_err());
}

#[test]
fn convolution_equals_operator() {
    for (n, k, m) in [(64, 24, 5), (300, 40, 30), (8, 8, 8)] {
        let p = make_probe(n, k, gauss(k), SeedSpec::new(2, n as u64)).unwrap();
        let x = draw_rademacher_spikes(n, m, SeedSpec::new(3, n as u64)).unwrap();
        let y = convolve_and_measure(&p, &x).unwrap();
        let z = p.operator().apply(&x.to_dense()).unwrap();
        let scale = z.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in y.iter().zip(&z) {
            assert!((a - b).abs() <= 1e-12 * scale.max(1.0));
        }
    }
    let p = make_probe(4, 2, gauss(2), SeedSpec::default()).unwrap();
    assert!(convolve_and_measure(&p, &SparseSignal::zeros(5)).is_err());
}

#[test]
fn identifies_impulse_response() {
    let cfg = SolverConfig::default();
    let p = make_probe(128, 40, gauss(40), SeedSpec::new(4, 0)).unwrap();
    let x = SparseSignal::new(128, vec![37], vec![-0.8]).unwrap();
    let y = convolve_and_measure(&p, &x).unwrap();
    let r = identify_system(&p, &y, &cfg).unwrap();
    let s = PipelineSummary::new("sysid", &x, 40, &r, &cfg).unwrap();
    assert!(s.success);
    let o = omp(&p.operator(), &y, 40, 1e-10).unwrap();
    assert!((o.x_hat[37] + 0.8).abs() < 1e-10);

    let zero = identify_system(&p, &[0.0; 40], &cfg).unwrap();
    assert!(zero.x_hat.iter().all(|&v| v == 0.0));
}

#[test]
fn identification_success_rate() {
    let cfg = SolverConfig::default();
    let mut ok = 0;
    for t in 0..20 {
        let p = make_probe(512, 200, gauss(200), SeedSpec::new(5, t)).unwrap();
        let x = draw_rademacher_spikes(512, 20, SeedSpec::new(6, t)).unwrap();
        let y = convolve_and_measure(&p, &x).unwrap();
        let r = identify_system(&p, &y, &cfg).unwrap();
        ok += usize::from(PipelineSummary::new("sysid", &x, 200, &r, &cfg).unwrap().success);
    }
    assert!(ok >= 18, "{ok}/20");
}

#[test]
fn pwc_recovery() {
    let cfg = SolverConfig::default();
    let a = MeasurementOperator::random(OperatorKind::SymToeplitz, 30, 64, gauss(30), SeedSpec::new(7, 0)).unwrap();
    let al = a.clone().compose_with_d();

    let c = 1.7;
    let x = vec![c; 64];
    let y = al.apply(&x).unwrap();
    let rec = recover_pwc(&al, &y, &cfg).unwrap();
    assert!((rec.theta_hat[0] - c).abs() < 1e-8);
    assert!(rec.theta_hat[1..].iter().all(|v| v.abs() < 1e-8));
    assert!(rec.x_hat.iter().all(|v| (v - c).abs() < 1e-8));

    let mut ok = 0;
    for t in 0..10 {
        let a = MeasurementOperator::random(OperatorKind::SymToeplitz, 80, 256, gauss(80), SeedSpec::new(8, t)).unwrap();
        let al = a.compose_with_d();
        let s = make_pwc(256, 5, SeedSpec::new(9, t)).unwrap();
        let y = al.apply(&s.x).unwrap();
        let rec = recover_pwc(&al, &y, &cfg).unwrap();
        let err: f64 = rec.x_hat.iter().zip(&s.x).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
            / s.x.iter().map(|v| v * v).sum::<f64>().sqrt();
        ok += usize::from(err <= 1e-3);
    }
    assert!(ok > 5, "{ok}/10");
}

#[test]
fn vector_csv_round_trip() {
    let p = make_probe(16, 4, gauss(4), SeedSpec::new(10, 0)).unwrap();
    let mut buf = Vec::new();
    write_vector_csv(&mut buf, &p.full()).unwrap();
    assert_eq!(read_vector_csv(buf.as_slice()).unwrap(), p.full());
}
