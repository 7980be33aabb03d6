//! Property suites behind `verify --suite NAME`.
//!
//! Each check returns an [`InvariantReport`] with a pass count; suites are
//! seeded and deterministic.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classify::{classify, classify_lhs, classify_rhs, region_map, Range, Verdict};
use crate::error::{Error, Result};
use crate::lab::{
    alpha0, alpha1_margin, alpha2_margin, alpha2_of, c0, c1, c2, c3, c4, cf_necessary_bound, f1,
    f2, lhs_zero_profile, lhs_zero_profile_argmin, q0_of, C4_ALPHA1_FACTOR,
};
use crate::means::{cf_check, mean_gap, power_mean, ExponentPair, Side, WeightedSample};
use crate::search::{
    brute_force_extremum, search_counterexample, verify_certificate, SearchConfig,
};

#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub name: String,
    pub passed: usize,
    pub total: usize,
    /// First failure, or a short summary.
    pub detail: String,
}

impl InvariantReport {
    fn new(name: &str) -> Self {
        InvariantReport {
            name: name.to_string(),
            passed: 0,
            total: 0,
            detail: String::new(),
        }
    }

    fn record(&mut self, ok: bool, failure: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.detail.is_empty() {
            self.detail = failure();
        }
    }

    fn with_summary(mut self, summary: String) -> Self {
        if self.ok() {
            self.detail = summary;
        }
        self
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.ok() { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {} {}/{}", self.name, self.passed, self.total)?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Means,
    Lemmas,
    Regions,
    Search,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Means, Suite::Lemmas, Suite::Regions, Suite::Search];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Means => "means",
            Suite::Lemmas => "lemmas",
            Suite::Regions => "regions",
            Suite::Search => "search",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == name)
            .ok_or_else(|| {
                Error::UnknownSuite(format!(
                    "{name} (expected one of means, lemmas, regions, search)"
                ))
            })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub invariants: Vec<InvariantReport>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.invariants.iter().all(InvariantReport::ok)
    }
}

pub fn run_suite(suite: Suite, tolerance: f64, seed: u64) -> SuiteReport {
    let invariants = match suite {
        Suite::Means => vec![
            mean_monotonicity(2000, seed),
            mean_homogeneity(2000, seed),
            permutation_invariance(1000, seed),
            geometric_continuity(500, seed),
            equality_characterization(100, seed),
            region_soundness(Side::Rhs, 500, 200, tolerance, seed),
            region_soundness(Side::Lhs, 500, 200, tolerance, seed),
        ],
        Suite::Lemmas => vec![
            exact_anchors(),
            alpha_constant(),
            derivative_identity(10_000, seed),
            c_polynomial_grid(),
            weight_exponent_bound(500, seed),
            linear_weight_endpoints(200, seed),
            bound_monotone(),
            profile_argmin_minimal(200, seed),
        ],
        Suite::Regions => vec![
            rhs_boundary_sharpness(),
            lhs_strip_complete(5000, seed),
            thm3_subsumption(5000, seed),
            region_map_determinism(201),
        ],
        Suite::Search => vec![
            fails_panel(100_000, tolerance),
            no_false_alarms(500, 10_000, tolerance, seed),
            oracle_holds_sign(50, 512, seed),
            oracle_agreement(512, 20_000, tolerance),
            search_determinism(seed),
        ],
    };
    SuiteReport { suite, invariants }
}

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// Sample with `n in [1, 8]`, values log-uniform in `(lo, hi]` and
/// weights uniform on the simplex.
fn random_sample(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> WeightedSample {
    let n = rng.gen_range(1..=8);
    let values = (0..n).map(|_| log_uniform(rng, lo, hi)).collect();
    let raw: Vec<f64> = (0..n)
        .map(|_| -(1.0 - rng.gen::<f64>()).ln() + f64::MIN_POSITIVE)
        .collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    WeightedSample::new(values, weights).expect("valid random sample")
}

fn random_pair(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> ExponentPair {
    loop {
        let (a, b) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
        if let Ok(exps) = ExponentPair::new(a.max(b), a.min(b)) {
            return exps;
        }
    }
}

fn in_rhs_region(r: f64, s: f64) -> bool {
    r > s && (0.0..=3.0).contains(&(r + s)) && r <= 2.0 && s >= -1.0
}

fn in_lhs_strip(r: f64, s: f64) -> bool {
    r > s && (-0.5..=1.0).contains(&s) && (0.0..=3.0).contains(&(r + s)) && r >= 1.0
}

/// Uniform draw from the region where `side` is proved to hold.
pub fn holds_region_pair(rng: &mut ChaCha8Rng, side: Side) -> ExponentPair {
    let (r_box, s_box, inside): (_, _, fn(f64, f64) -> bool) = match side {
        Side::Rhs => ((0.0, 2.0), (-1.0, 2.0), in_rhs_region),
        Side::Lhs => ((1.0, 3.5), (-0.5, 1.0), in_lhs_strip),
    };
    loop {
        let r = rng.gen_range(r_box.0..=r_box.1);
        let s = rng.gen_range(s_box.0..=s_box.1);
        if inside(r, s) {
            return ExponentPair::new(r, s).expect("r > s inside the region");
        }
    }
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn mean_monotonicity(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("power mean nondecreasing in the exponent");
    let mut rng = rng(seed, 1);
    for _ in 0..cases {
        let sample = random_sample(&mut rng, 1e-3, 1e3);
        let exps = random_pair(&mut rng, -20.0, 20.0);
        let gap = mean_gap(&sample, exps.r(), exps.s()).expect("finite exponents");
        let hi = power_mean(&sample, exps.r()).expect("finite");
        let slack = 1e-12 * hi;
        report.record(gap >= -slack, || {
            format!("M_r - M_s = {gap:e} at r = {}, s = {}", exps.r(), exps.s())
        });
    }
    report
}

pub fn mean_homogeneity(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("power mean homogeneous of degree one");
    let mut rng = rng(seed, 2);
    for _ in 0..cases {
        let sample = random_sample(&mut rng, 1e-3, 1e3);
        let c = log_uniform(&mut rng, 1e-6, 1e6);
        let t = rng.gen_range(-30.0..30.0);
        let scaled: Vec<f64> = sample.values().iter().map(|x| c * x).collect();
        let scaled = WeightedSample::new(scaled, sample.weights().to_vec()).expect("valid");
        let (a, b) = (
            power_mean(&scaled, t).expect("finite"),
            c * power_mean(&sample, t).expect("finite"),
        );
        report.record(close(a, b, 1e-12), || {
            format!("M_{t}(cx) = {a:e} vs c M = {b:e}")
        });
    }
    report
}

pub fn permutation_invariance(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("bound check invariant under permutation");
    let mut rng = rng(seed, 3);
    for _ in 0..cases {
        let sample = random_sample(&mut rng, 1e-3, 1e3);
        let exps = random_pair(&mut rng, -5.0, 5.0);
        let mut pairs: Vec<(f64, f64)> = sample.pairs().collect();
        pairs.reverse();
        let k = rng.gen_range(0..pairs.len());
        pairs.rotate_left(k);
        let shuffled = WeightedSample::from_pairs(&pairs).expect("valid");
        let (a, b) = (cf_check(&sample, exps), cf_check(&shuffled, exps));
        let scale = a.gap.abs().max(a.lower.abs()).max(1e-300);
        let ok = (a.gap - b.gap).abs() <= 1e-12 * scale
            && close(a.lower, b.lower, 1e-12)
            && a.upper.zip(b.upper).is_none_or(|(x, y)| close(x, y, 1e-12));
        report.record(ok, || format!("{a:?} vs {b:?}"));
    }
    report
}

pub fn geometric_continuity(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("power mean continuous at exponent 0");
    let mut rng = rng(seed, 4);
    for _ in 0..cases {
        let sample = random_sample(&mut rng, 1e-3, 1e3);
        let g = power_mean(&sample, 0.0).expect("finite");
        for t in [1e-13, -1e-13] {
            let m = power_mean(&sample, t).expect("finite");
            report.record(close(m, g, 1e-10), || format!("M_{t} = {m:e} vs G = {g:e}"));
        }
    }
    report
}

/// All-equal samples give `gap = lower = upper = 0`.
pub fn equality_characterization(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("all-equal samples have zero gap and bounds");
    let mut rng = rng(seed, 5);
    for _ in 0..cases {
        let n = rng.gen_range(1..=8);
        let c = log_uniform(&mut rng, 1e-3, 1e3);
        let mut sample = random_sample(&mut rng, 1.0, 2.0);
        while sample.len() != n {
            sample = random_sample(&mut rng, 1.0, 2.0);
        }
        let sample = WeightedSample::new(vec![c; n], sample.weights().to_vec()).expect("valid");
        let exps = random_pair(&mut rng, -10.0, 10.0);
        let check = cf_check(&sample, exps);
        let ok = check.gap.abs() <= 1e-12
            && check.lower.abs() <= 1e-12
            && check.upper.is_some_and(|u| u.abs() <= 1e-12);
        report.record(ok, || format!("c = {c}, n = {n}: {check:?}"));
    }
    report
}

/// Random samples never violate `side` inside its proved region.
pub fn region_soundness(
    side: Side,
    pairs: usize,
    samples: usize,
    tolerance: f64,
    seed: u64,
) -> InvariantReport {
    let name = match side {
        Side::Rhs => "upper bound holds on its proved region",
        Side::Lhs => "lower bound holds on its proved strip",
    };
    let mut rng = rng(seed, 6 + side as u64);
    let draws: Vec<(ExponentPair, u64)> = (0..pairs)
        .map(|_| (holds_region_pair(&mut rng, side), rng.gen()))
        .collect();
    let failures: Vec<Option<String>> = draws
        .par_iter()
        .map(|&(exps, sub_seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(sub_seed);
            (0..samples).find_map(|_| {
                let sample = random_sample(&mut rng, 1e-3, 10.0);
                let check = cf_check(&sample, exps);
                check.violates(side, tolerance).then(|| {
                    format!(
                        "({}, {}) residual {:e} at {:?}",
                        exps.r(),
                        exps.s(),
                        check.residual(side).unwrap_or(f64::NAN),
                        sample.values()
                    )
                })
            })
        })
        .collect();
    let mut report = InvariantReport::new(name);
    for failure in failures {
        report.total += samples;
        match failure {
            None => report.passed += samples,
            Some(msg) => {
                report.passed += samples - 1;
                if report.detail.is_empty() {
                    report.detail = msg;
                }
            }
        }
    }
    report
}

pub fn exact_anchors() -> InvariantReport {
    let mut report = InvariantReport::new("exact anchors");
    let b1 = cf_necessary_bound(1.0).expect("r = 1 is admissible");
    report.record(b1 == 1.0, || format!("bound(1) = {b1}"));
    let big = cf_necessary_bound(1e6).expect("admissible");
    report.record((3.997..=4.0).contains(&big), || {
        format!("bound(1e6) = {big}")
    });
    let z = c0(3.0, -0.5);
    report.record(z.abs() <= 1e-12, || format!("c0(3, -1/2) = {z:e}"));
    report
}

pub fn alpha_constant() -> InvariantReport {
    let mut report = InvariantReport::new("c4 constant admissible for the weight exponent");
    let a = alpha0(5.0 / 6.0, 0.2, -1.0).expect("admissible");
    report.record((C4_ALPHA1_FACTOR..0.089).contains(&a), || {
        format!("alpha0(5/6, 1/5, -1) = {a}")
    });
    report
}

/// Central difference of `f1` in `x` with a Richardson step.
fn d_f1(x: f64, q: f64, exps: ExponentPair) -> f64 {
    let diff = |h: f64| {
        (f1(x + h, q, exps).expect("admissible") - f1(x - h, q, exps).expect("admissible"))
            / (2.0 * h)
    };
    let h = 1e-3 * x;
    (4.0 * diff(h / 2.0) - diff(h)) / 3.0
}

pub fn derivative_identity(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("f2 = (1 - q)^-1 d f1 / dx");
    let mut rng = rng(seed, 8);
    for _ in 0..cases {
        let exps = loop {
            let exps = random_pair(&mut rng, -3.0, 4.0);
            if exps.r().abs() > 1e-3 && exps.s().abs() > 1e-3 {
                break exps;
            }
        };
        let x = log_uniform(&mut rng, 0.1, 10.0);
        let q = rng.gen_range(0.0..0.95);
        let exact = f2(x, q, exps).expect("admissible");
        let numeric = d_f1(x, q, exps) / (1.0 - q);
        report.record(
            (exact - numeric).abs() <= 1e-6 * (1.0 + exact.abs()),
            || {
                format!(
                    "x = {x}, q = {q}, r = {}, s = {}: {exact:e} vs {numeric:e}",
                    exps.r(),
                    exps.s()
                )
            },
        );
    }
    report
}

/// `max(c1..c4) <= 1e-12` on `s in [-1/2, 0)`, `r in (2, 3 - s]`, step 1e-3;
/// `c4` only on `(2, 3]` and at `r = 3 - s`.
pub fn c_polynomial_grid() -> InvariantReport {
    let mut report = InvariantReport::new("c-polynomials nonpositive on the certificate grid");
    let mut worst = f64::NEG_INFINITY;
    for i in 0..500 {
        let s = -0.5 + i as f64 * 1e-3;
        let last = ((1.0 - s) * 1000.0).round() as usize;
        for j in 1..=last {
            let r = if j == last {
                3.0 - s
            } else {
                2.0 + j as f64 * 1e-3
            };
            let mut values = vec![c1(r, s), c2(r, s), c3(r, s)];
            if r <= 3.0 || j == last {
                values.push(c4(r, s).expect("r > 2"));
            }
            let top = values.into_iter().fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(top);
            report.record(top <= 1e-12, || {
                format!("max c = {top:e} at r = {r}, s = {s}")
            });
        }
    }
    report.with_summary(format!("largest value {worst:e}"))
}

pub fn weight_exponent_bound(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("weight exponent bound below its maximum");
    let mut rng = rng(seed, 9);
    for _ in 0..cases {
        let q1 = rng.gen_range(0.0..=1.0);
        let x0 = rng.gen_range(0.01..0.99);
        let s = -rng.gen_range(0.01..=1.0);
        let a0 = alpha0(q1, x0, s).expect("admissible");
        let alpha1 = rng.gen_range(0.0..=1.0) * a0;
        let q = rng.gen_range(0.0..=1.0) * q1;
        let worst = (0..=200)
            .map(|k| {
                let y = x0 + (1.0 - x0) * k as f64 / 200.0;
                let x = y.powf(-1.0 / s);
                alpha1_margin(x, q, alpha1, s)
            })
            .fold(f64::INFINITY, f64::min);
        report.record(worst >= -1e-12, || {
            format!("q1 = {q1}, x0 = {x0}, s = {s}, alpha1 = {alpha1}: margin {worst:e}")
        });
    }
    report
}

pub fn linear_weight_endpoints(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("linear weight inequality at its endpoints");
    let mut rng = rng(seed, 10);
    let mut taken = 0;
    while taken < cases {
        let s = -rng.gen_range(0.01..=1.0);
        let r = rng.gen_range(2.01..=3.0 - s);
        let exps = ExponentPair::new(r, s).expect("r > s");
        let q0 = q0_of(exps).expect("r > 2");
        if !(0.5..1.0).contains(&q0) {
            continue;
        }
        taken += 1;
        // alpha2 / s grows with q2 and equals 1 at q0
        let q2 = rng.gen_range(0.5..=q0);
        let alpha2 = alpha2_of(q2, exps).expect("admissible");
        let worst = [q2, 1.0]
            .into_iter()
            .flat_map(|q| {
                (1..=200).map(move |k| {
                    let x = (k as f64 / 200.0).powi(3);
                    alpha2_margin(x, q, alpha2, exps)
                })
            })
            .fold(f64::INFINITY, f64::min);
        report.record(worst >= -1e-12, || {
            format!("r = {r}, s = {s}, q2 = {q2}: margin {worst:e}")
        });
    }
    report
}

pub fn bound_monotone() -> InvariantReport {
    let mut report = InvariantReport::new("profile bound increasing in r");
    let mut previous = cf_necessary_bound(1.0).expect("admissible");
    for k in 1..=600 {
        let r = 10f64.powf(k as f64 / 100.0);
        let b = cf_necessary_bound(r).expect("admissible");
        report.record(b >= previous && b <= 4.0, || format!("bound({r}) = {b}"));
        previous = b;
    }
    report
}

pub fn profile_argmin_minimal(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("profile minimised at its closed-form argmin");
    let mut rng = rng(seed, 11);
    for _ in 0..cases {
        let r = rng.gen_range(1.01..6.0);
        let s = -rng.gen_range(0.01..5.0);
        let exps = ExponentPair::new(r, s).expect("r > s");
        let y = lhs_zero_profile_argmin(exps).expect("admissible");
        if !(y > 0.0 && y < 1.0) {
            continue;
        }
        let best = lhs_zero_profile(y, exps).expect("admissible");
        for _ in 0..200 {
            let other = rng.gen_range(f64::EPSILON..=1.0);
            let value = lhs_zero_profile(other, exps).expect("admissible");
            report.record(best <= value + 1e-12 * value.abs().max(1.0), || {
                format!("r = {r}, s = {s}: profile({y}) = {best} > profile({other}) = {value}")
            });
        }
    }
    report
}

/// Nudging any one condition across its boundary by 1e-9 flips the verdict.
pub fn rhs_boundary_sharpness() -> InvariantReport {
    let mut report = InvariantReport::new("upper-bound verdict sharp at each boundary");
    let e = 1e-9;
    // (inside, outside) pairs on each boundary
    let probes = [
        ((0.5, -0.5), (0.5, -0.5 - e)),
        ((0.5 + e, -0.5), (0.5 - e, -0.5)),
        ((1.8, 1.2), (1.8, 1.2 + e)),
        ((1.6, 1.4 - e), (1.6, 1.4 + e)),
        ((2.0, 0.5), (2.0 + e, 0.5)),
        ((2.0 - e, -0.5), (2.0 + e, -0.5)),
        ((1.5, -1.0), (1.5, -1.0 - e)),
        ((1.5, -1.0 + e), (1.5, -1.0 - e)),
    ];
    for ((ri, si), (ro, so)) in probes {
        let inside = classify_rhs(ExponentPair::new(ri, si).expect("ordered"));
        let outside = classify_rhs(ExponentPair::new(ro, so).expect("ordered"));
        let ok = inside.is_ok_and(|c| c.verdict == Verdict::Holds)
            && outside.is_ok_and(|c| c.verdict == Verdict::Fails);
        report.record(ok, || format!("({ri}, {si}) / ({ro}, {so})"));
    }
    report
}

pub fn lhs_strip_complete(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("lower-bound verdict decided for -1/2 <= s <= 1");
    let mut rng = rng(seed, 12);
    for _ in 0..cases {
        let s = rng.gen_range(-0.5..=1.0);
        let r = s + rng.gen_range(1e-6..6.0);
        let c = classify_lhs(ExponentPair::new(r, s).expect("r > s")).expect("ordered");
        let expected = if in_lhs_strip(r, s) {
            Verdict::Holds
        } else {
            Verdict::Fails
        };
        report.record(c.verdict == expected, || {
            format!("({r}, {s}) gave {}", c.verdict.as_str())
        });
    }
    report
}

pub fn thm3_subsumption(cases: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("sufficient condition agrees with the strip rule");
    let mut rng = rng(seed, 13);
    let mut taken = 0;
    while taken < cases {
        let s = rng.gen_range(-0.5..=1.0);
        let r = rng.gen_range(1.0..=3.0);
        // the sufficient condition is only read where the necessary ones hold
        if r <= s || r + s > 3.0 || (r - 1.0) * (r - 2.0) > 1.0 - s * s {
            continue;
        }
        taken += 1;
        let c = classify_lhs(ExponentPair::new(r, s).expect("r > s")).expect("ordered");
        report.record(c.verdict == Verdict::Holds, || {
            format!("({r}, {s}) gave {}", c.verdict.as_str())
        });
    }
    report
}

pub fn region_map_determinism(grid_n: usize) -> InvariantReport {
    let mut report = InvariantReport::new("region map identical across runs");
    let render = || {
        let cells =
            region_map(Range::new(-1.0, 4.0), Range::new(-5.0, 4.0), grid_n).expect("valid grid");
        crate::cli::region_csv(&cells)
    };
    let (a, b) = (render(), render());
    report.record(a == b, || "CSV bytes differ".into());
    report.with_summary(format!("{grid_n}x{grid_n}, {} bytes", a.len()))
}

/// Exponent pairs where the search must find a certificate.
pub const FAILS_PANEL: [(Side, f64, f64); 7] = [
    (Side::Rhs, 2.5, 0.5),
    (Side::Rhs, 2.2, -0.9),
    (Side::Rhs, -0.1, -0.5),
    (Side::Rhs, 1.5, -1.2),
    (Side::Lhs, 0.9, 0.5),
    (Side::Lhs, 3.5, -0.4),
    (Side::Lhs, 2.5, 1.4),
];

pub fn fails_panel(budget: usize, tolerance: f64) -> InvariantReport {
    let mut report = InvariantReport::new("search certifies every FAILS panel pair");
    let config = SearchConfig {
        budget,
        tolerance,
        ..SearchConfig::default()
    };
    let mut slowest = 0.0f64;
    for (side, r, s) in FAILS_PANEL {
        let exps = ExponentPair::new(r, s).expect("ordered");
        let certified = classify(exps, side).is_ok_and(|c| c.verdict == Verdict::Fails);
        let start = std::time::Instant::now();
        let found = search_counterexample(exps, side, &config).expect("valid input");
        let elapsed = start.elapsed().as_secs_f64();
        slowest = slowest.max(elapsed);
        let verified = found
            .as_ref()
            .is_some_and(|cert| verify_certificate(cert, tolerance).unwrap_or(false));
        report.record(certified && verified && elapsed < 1.0, || {
            format!("{side} ({r}, {s}): classified {certified}, verified {verified}, {elapsed:.3}s")
        });
    }
    report.with_summary(format!("slowest pair {slowest:.3}s"))
}

pub fn no_false_alarms(pairs: usize, budget: usize, tolerance: f64, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("search finds nothing on proved regions");
    let mut rng = rng(seed, 14);
    let draws: Vec<(Side, ExponentPair)> = (0..pairs)
        .map(|i| {
            let side = if i % 2 == 0 { Side::Rhs } else { Side::Lhs };
            (side, holds_region_pair(&mut rng, side))
        })
        .collect();
    let config = SearchConfig {
        budget,
        tolerance,
        seed,
    };
    let found: Vec<Option<String>> = draws
        .par_iter()
        .map(|&(side, exps)| {
            search_counterexample(exps, side, &config)
                .expect("valid input")
                .map(|cert| {
                    format!(
                        "{side} ({}, {}) residual {:e}",
                        exps.r(),
                        exps.s(),
                        cert.residual
                    )
                })
        })
        .collect();
    for alarm in found {
        report.record(alarm.is_none(), || alarm.clone().unwrap_or_default());
    }
    report
}

/// The exhaustive oracle confirms the proved sign of `F` on each side.
pub fn oracle_holds_sign(pairs_per_side: usize, grid_n: usize, seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("exhaustive grid confirms the proved sign");
    let mut rng = rng(seed, 15);
    for side in [Side::Rhs, Side::Lhs] {
        for _ in 0..pairs_per_side {
            let exps = holds_region_pair(&mut rng, side);
            let ext = brute_force_extremum(exps, side, grid_n).expect("valid grid");
            report.record(!ext.violates(side, 1e-9), || {
                format!("{side} ({}, {}): {ext:?}", exps.r(), exps.s())
            });
        }
    }
    report
}

/// Pairs on which the search and the exhaustive oracle are compared.
///
/// The first 25 lie in proved regions; the rest fail with violations large
/// enough to show on the oracle grid.
pub const AGREEMENT_PANEL: [(Side, f64, f64); 50] = [
    (Side::Rhs, 1.0, 0.0),
    (Side::Rhs, 2.0, -1.0),
    (Side::Rhs, 1.5, 0.5),
    (Side::Rhs, 0.5, -0.5),
    (Side::Rhs, 2.0, 1.0),
    (Side::Rhs, 1.7, 1.3),
    (Side::Rhs, 0.3, 0.1),
    (Side::Rhs, 1.2, -0.9),
    (Side::Rhs, 0.8, -0.6),
    (Side::Rhs, 1.9, 0.7),
    (Side::Rhs, 0.05, -0.02),
    (Side::Rhs, 1.0, -1.0),
    (Side::Lhs, 1.0, 0.0),
    (Side::Lhs, 3.0, 0.0),
    (Side::Lhs, 2.0, -0.5),
    (Side::Lhs, 2.5, 0.5),
    (Side::Lhs, 1.2, 1.0),
    (Side::Lhs, 3.5, -0.5),
    (Side::Lhs, 1.5, -0.3),
    (Side::Lhs, 2.9, 0.1),
    (Side::Lhs, 1.0, -0.5),
    (Side::Lhs, 2.2, 0.8),
    (Side::Lhs, 1.5, -1.05),
    (Side::Lhs, 1.5, 1.1),
    (Side::Lhs, 2.8, -0.6),
    (Side::Rhs, 2.5, 0.5),
    (Side::Rhs, 2.2, -0.9),
    (Side::Rhs, -0.1, -0.5),
    (Side::Rhs, 1.5, -1.2),
    (Side::Rhs, 3.0, 0.0),
    (Side::Rhs, 2.1, 0.2),
    (Side::Rhs, 1.8, 1.5),
    (Side::Rhs, 2.6, 1.0),
    (Side::Rhs, 0.5, -1.0),
    (Side::Rhs, 1.0, -1.5),
    (Side::Rhs, 0.0, -2.0),
    (Side::Rhs, -1.0, -2.0),
    (Side::Rhs, 4.0, -1.0),
    (Side::Lhs, 2.5, 1.4),
    (Side::Lhs, 4.0, 0.0),
    (Side::Lhs, 0.5, 0.2),
    (Side::Lhs, 3.0, 1.0),
    (Side::Lhs, 0.3, -0.1),
    (Side::Lhs, 5.0, -1.0),
    (Side::Lhs, 2.0, 1.5),
    (Side::Lhs, 3.8, -0.2),
    (Side::Lhs, 4.5, -1.0),
    (Side::Lhs, 0.0, -0.4),
    (Side::Lhs, 0.5, -0.6),
    (Side::Lhs, 3.0, 0.5),
];

/// Search finds a certificate exactly when the oracle sees a violation.
pub fn oracle_agreement(grid_n: usize, budget: usize, tolerance: f64) -> InvariantReport {
    let mut report = InvariantReport::new("search outcome matches the exhaustive oracle");
    let config = SearchConfig {
        budget,
        tolerance,
        ..SearchConfig::default()
    };
    for (side, r, s) in AGREEMENT_PANEL {
        let exps = ExponentPair::new(r, s).expect("ordered");
        let ext = brute_force_extremum(exps, side, grid_n).expect("valid grid");
        let found = search_counterexample(exps, side, &config).expect("valid input");
        report.record(ext.violates(side, tolerance) == found.is_some(), || {
            format!(
                "{side} ({r}, {s}): oracle {:e}, search {}",
                ext.value,
                if found.is_some() {
                    "certificate"
                } else {
                    "none"
                }
            )
        });
    }
    report
}

pub fn search_determinism(seed: u64) -> InvariantReport {
    let mut report = InvariantReport::new("search identical across runs");
    let config = SearchConfig {
        seed,
        ..SearchConfig::default()
    };
    for (side, r, s) in FAILS_PANEL.into_iter().chain([(Side::Rhs, 1.0, 0.0)]) {
        let exps = ExponentPair::new(r, s).expect("ordered");
        let run = || {
            let found = search_counterexample(exps, side, &config).expect("valid input");
            serde_json::to_string(&found).expect("serialisable")
        };
        let (a, b) = (run(), run());
        report.record(a == b, || format!("{side} ({r}, {s})"));
    }
    report
}
