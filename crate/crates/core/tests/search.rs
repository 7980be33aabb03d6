use std::time::Instant;

use powermean::{
    brute_force_extremum, cf_check, classify, search_counterexample, verify_certificate,
    ExponentPair, SearchConfig, Side, Verdict, DEFAULT_TOLERANCE,
};

fn pair(r: f64, s: f64) -> ExponentPair {
    ExponentPair::new(r, s).unwrap()
}

const FAILS_PANEL: [(Side, f64, f64); 7] = [
    (Side::Rhs, 2.5, 0.5),
    (Side::Rhs, 2.2, -0.9),
    (Side::Rhs, -0.1, -0.5),
    (Side::Rhs, 1.5, -1.2),
    (Side::Lhs, 0.9, 0.5),
    (Side::Lhs, 3.5, -0.4),
    (Side::Lhs, 2.5, 1.4),
];

#[test]
fn fails_panel_yields_verified_certificates() {
    for (side, r, s) in FAILS_PANEL {
        let exps = pair(r, s);
        assert_eq!(classify(exps, side).unwrap().verdict, Verdict::Fails);
        let start = Instant::now();
        let cert = search_counterexample(exps, side, &SearchConfig::default())
            .unwrap()
            .unwrap_or_else(|| panic!("no certificate for {side} ({r}, {s})"));
        let elapsed = start.elapsed();
        eprintln!(
            "{side} ({r}, {s}): {:?} residual {:e} x {:?} q {:?} in {elapsed:?}",
            cert.provenance,
            cert.residual,
            cert.sample.values(),
            cert.sample.weights()
        );
        assert!(verify_certificate(&cert, DEFAULT_TOLERANCE).unwrap());
        let check = cf_check(&cert.sample, exps);
        let again = check.residual(side).unwrap();
        assert!((again - cert.residual).abs() <= 1e-9 * cert.residual.abs());
    }
}

#[test]
fn certificate_witnesses_sit_where_expected() {
    let config = SearchConfig::default();
    let cert = search_counterexample(pair(2.5, 0.5), Side::Rhs, &config)
        .unwrap()
        .unwrap();
    // small weight on a large value
    assert!(cert.sample.max() > 1.0 && cert.sample.weights()[1] < 0.5);
    let cert = search_counterexample(pair(0.9, 0.5), Side::Lhs, &config)
        .unwrap()
        .unwrap();
    // most weight near zero
    assert!(cert.sample.min() < 1e-3 && cert.sample.weights()[0] > 0.5);
}

#[test]
fn theorem_pair_has_no_counterexample() {
    let config = SearchConfig::default();
    for side in [Side::Rhs, Side::Lhs] {
        assert!(search_counterexample(pair(1.0, 0.0), side, &config)
            .unwrap()
            .is_none());
    }
}

#[test]
fn search_is_deterministic() {
    let config = SearchConfig {
        seed: 7,
        ..SearchConfig::default()
    };
    for (side, r, s) in FAILS_PANEL {
        let a = search_counterexample(pair(r, s), side, &config).unwrap();
        let b = search_counterexample(pair(r, s), side, &config).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}

#[test]
fn oracle_on_known_pairs() {
    let ext = brute_force_extremum(pair(1.0, 0.0), Side::Rhs, 512).unwrap();
    assert!(ext.value <= 1e-9, "{ext:?}");
    let ext = brute_force_extremum(pair(2.2, 0.9), Side::Rhs, 512).unwrap();
    assert!(ext.value > 0.0);
}

#[test]
fn tolerance_edge_certificate_is_decided() {
    let exps = pair(2.5, 0.5);
    let cert = search_counterexample(exps, Side::Rhs, &SearchConfig::default())
        .unwrap()
        .unwrap();
    for tol in [1e-3, 1e-1, 1.0, 10.0, 1e3] {
        verify_certificate(&cert, tol).unwrap();
    }
    let edge = cert.residual.abs() / cf_check(&cert.sample, exps).scale() * 10.0;
    let a = verify_certificate(&cert, edge).unwrap();
    assert_eq!(a, verify_certificate(&cert, edge).unwrap());
}

#[test]
fn no_false_alarms_on_proved_regions() {
    let report = powermean::suites::no_false_alarms(500, 10_000, DEFAULT_TOLERANCE, 11);
    assert!(report.ok(), "{report}");
}

#[test]
fn search_agrees_with_exhaustive_oracle() {
    let report = powermean::suites::oracle_agreement(512, 20_000, DEFAULT_TOLERANCE);
    assert!(report.ok(), "{report}");
    assert_eq!(report.total, 50);
}
