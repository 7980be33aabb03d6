use powermean::{cf_check, mean_gap, power_mean, variance, ExponentPair, Side, WeightedSample};
use proptest::prelude::*;

fn sample_strategy() -> impl Strategy<Value = WeightedSample> {
    (1usize..=8)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-6.9f64..6.9, n),
                prop::collection::vec(0.01f64..1.0, n),
            )
        })
        .prop_map(|(logs, raw)| {
            let total: f64 = raw.iter().sum();
            WeightedSample::new(
                logs.iter().map(|l| l.exp()).collect(),
                raw.iter().map(|w| w / total).collect(),
            )
            .unwrap()
        })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn worked_examples() {
    let s = WeightedSample::new(vec![1.0, 4.0], vec![0.5, 0.5]).unwrap();
    assert_eq!(power_mean(&s, 1.0).unwrap(), 2.5);
    assert!(close(power_mean(&s, 0.0).unwrap(), 2.0, 1e-15));
    assert!(close(power_mean(&s, -1.0).unwrap(), 1.6, 1e-15));
    assert_eq!(variance(&s), 2.25);
    let check = cf_check(&s, ExponentPair::new(1.0, 0.0).unwrap());
    assert!(close(check.gap, 0.5, 1e-15));
    assert!(close(check.lower, 0.28125, 1e-15));
    assert!(close(check.upper.unwrap(), 1.125, 1e-15));
}

#[test]
fn variance_of_zero_one_sample() {
    for q in [0.1, 0.37, 0.5, 0.93] {
        let s = WeightedSample::new(vec![0.0, 1.0], vec![q, 1.0 - q]).unwrap();
        assert!(close(variance(&s), q * (1.0 - q), 1e-15));
    }
}

#[test]
fn zero_values_with_nonpositive_exponent() {
    let s = WeightedSample::new(vec![0.0, 3.0], vec![0.2, 0.8]).unwrap();
    assert_eq!(power_mean(&s, 0.0).unwrap(), 0.0);
    assert_eq!(power_mean(&s, -2.0).unwrap(), 0.0);
    let check = cf_check(&s, ExponentPair::new(1.0, -1.0).unwrap());
    assert_eq!(check.upper, None);
    assert!(!check.violates(Side::Rhs, 1e-9));
}

proptest! {
    #[test]
    fn monotone_in_exponent(sample in sample_strategy(), a in -30.0f64..30.0, b in -30.0f64..30.0) {
        prop_assume!(a != b);
        let (r, s) = (a.max(b), a.min(b));
        let gap = mean_gap(&sample, r, s).unwrap();
        prop_assert!(gap >= -1e-12 * power_mean(&sample, r).unwrap());
    }

    #[test]
    fn homogeneous(sample in sample_strategy(), t in -20.0f64..20.0, ln_c in -10.0f64..10.0) {
        let c = ln_c.exp();
        let scaled = WeightedSample::new(
            sample.values().iter().map(|x| c * x).collect(),
            sample.weights().to_vec(),
        ).unwrap();
        let (a, b) = (power_mean(&scaled, t).unwrap(), c * power_mean(&sample, t).unwrap());
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn permutation_invariant(sample in sample_strategy(), r in -5.0f64..5.0, d in 0.01f64..5.0, k in 0usize..8) {
        let exps = ExponentPair::new(r, r - d).unwrap();
        let mut pairs: Vec<(f64, f64)> = sample.pairs().collect();
        let k = k % pairs.len();
        pairs.rotate_left(k);
        pairs.reverse();
        let other = WeightedSample::from_pairs(&pairs).unwrap();
        let (a, b) = (cf_check(&sample, exps), cf_check(&other, exps));
        prop_assert!((a.gap - b.gap).abs() <= 1e-12 * a.gap.abs().max(power_mean(&sample, r).unwrap()));
        prop_assert!(close(a.lower, b.lower, 1e-12));
    }

    #[test]
    fn continuous_at_zero(sample in sample_strategy()) {
        let g = power_mean(&sample, 0.0).unwrap();
        for t in [1e-13, -1e-13] {
            prop_assert!(close(power_mean(&sample, t).unwrap(), g, 1e-10));
        }
    }

    #[test]
    fn lower_never_exceeds_upper(sample in sample_strategy(), r in -5.0f64..5.0, d in 0.01f64..5.0) {
        let check = cf_check(&sample, ExponentPair::new(r, r - d).unwrap());
        prop_assert!(check.lower <= check.upper.unwrap());
        prop_assert!(check.lower >= 0.0);
    }

    #[test]
    fn all_equal_gives_zeros(c in 1e-3f64..1e3, n in 1usize..8, r in -10.0f64..10.0, d in 0.01f64..10.0) {
        let sample = WeightedSample::uniform(vec![c; n]).unwrap();
        let check = cf_check(&sample, ExponentPair::new(r, r - d).unwrap());
        prop_assert!(check.gap.abs() <= 1e-12);
        prop_assert_eq!(check.lower, 0.0);
        prop_assert_eq!(check.upper, Some(0.0));
    }

    #[test]
    fn weights_are_renormalised_within_slack(raw in prop::collection::vec(0.01f64..1.0, 2..8), eps in -9e-10f64..9e-10) {
        let total: f64 = raw.iter().sum();
        let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        weights[0] += eps;
        let sample = WeightedSample::new(vec![1.0; raw.len()], weights).unwrap();
        let sum: f64 = sample.weights().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn serde_round_trip_is_exact() {
    let s = WeightedSample::new(vec![0.1, 1.0 / 3.0, 7.25], vec![0.2, 0.3, 0.5]).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    let back: WeightedSample = serde_json::from_str(&text).unwrap();
    assert_eq!(s, back);
    let bad = r#"{"values":[1.0,2.0],"weights":[0.5,0.1]}"#;
    assert!(serde_json::from_str::<WeightedSample>(bad).is_err());
}
