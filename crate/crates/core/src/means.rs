//! Weighted power means, the weighted variance, and the two-sided variance
//! bound on the difference `M_r - M_s` of two power means.
//!
//! Every mean is evaluated relative to a reference value (the sample maximum
//! or minimum) in log space, so exponents of any size stay in range and the
//! difference of two nearly equal means is formed from their small relative
//! excesses rather than by subtracting two large numbers.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Violation tolerance used when no other value is configured.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Weight sums further than this from 1 are rejected instead of rescaled.
pub const WEIGHT_SUM_SLACK: f64 = 1e-9;

/// Nonnegative values paired with positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSample", into = "RawSample")]
pub struct WeightedSample {
    values: Vec<f64>,
    weights: Vec<f64>,
    min: f64,
    max: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSample {
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl TryFrom<RawSample> for WeightedSample {
    type Error = Error;

    fn try_from(raw: RawSample) -> Result<Self> {
        WeightedSample::new(raw.values, raw.weights)
    }
}

impl From<WeightedSample> for RawSample {
    fn from(sample: WeightedSample) -> Self {
        RawSample {
            values: sample.values,
            weights: sample.weights,
        }
    }
}

impl WeightedSample {
    /// Validates the sample and rescales the weights to sum to one.
    ///
    /// Weight sums within [`WEIGHT_SUM_SLACK`] of 1 are accepted and divided
    /// through; anything further away is an error.
    pub fn new(values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.len() != weights.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                weights: weights.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidValue { index, value });
            }
        }
        for (index, &value) in weights.iter().enumerate() {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::InvalidWeight { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_SLACK {
            return Err(Error::WeightSum { sum });
        }
        let weights = if sum == 1.0 {
            weights
        } else {
            weights.into_iter().map(|w| w / sum).collect()
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(0.0, f64::max);
        Ok(WeightedSample {
            values,
            weights,
            min,
            max,
        })
    }

    /// Equal weights `1/n`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        WeightedSample::new(values, vec![1.0 / n as f64; n])
    }

    /// Builds a sample from `(value, weight)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let (values, weights) = pairs.iter().copied().unzip();
        WeightedSample::new(values, weights)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest value (`x_1` in sorted notation).
    pub fn min(&self) -> f64 {
        self.min
    }

    /// Largest value (`x_n` in sorted notation).
    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    /// Weighted arithmetic mean.
    pub fn arithmetic_mean(&self) -> f64 {
        let pivot = self.values[0];
        pivot + self.pairs().map(|(x, q)| q * (x - pivot)).sum::<f64>()
    }

    /// `M_t / reference - 1`, accurate when the mean is close to the reference.
    ///
    /// `reference` must be positive. The zero-value convention (`M_t = 0` for
    /// `t <= 0` when some value is 0) is applied here.
    fn relative_excess(&self, t: f64, reference: f64) -> f64 {
        if t == 0.0 {
            let log_ratio: f64 = self.pairs().map(|(x, q)| q * ln_ratio(x, reference)).sum();
            return log_ratio.exp_m1();
        }
        if t < 0.0 && self.min == 0.0 {
            return -1.0;
        }
        (ln_power_sum(self, t, reference) / t).exp_m1()
    }
}

/// `ln(x / reference)`, falling back to a log difference when the ratio
/// leaves the normal range.
fn ln_ratio(x: f64, reference: f64) -> f64 {
    let ratio = x / reference;
    if ratio.is_normal() || x == 0.0 {
        ratio.ln()
    } else {
        x.ln() - reference.ln()
    }
}

/// `ln sum q_i (x_i / reference)^t` for `t != 0`.
///
/// Uses `log1p(sum q_i expm1(a_i))` while the sum is a small perturbation of
/// one, and a max-shifted log-sum-exp otherwise.
fn ln_power_sum(sample: &WeightedSample, t: f64, reference: f64) -> f64 {
    let exponent = |x: f64| t * ln_ratio(x, reference);
    let max_a = sample
        .values
        .iter()
        .map(|&x| exponent(x))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_a <= 700.0 {
        let perturbation: f64 = sample.pairs().map(|(x, q)| q * exponent(x).exp_m1()).sum();
        if perturbation.abs() <= 0.5 {
            return perturbation.ln_1p();
        }
    }
    if max_a == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let shifted: f64 = sample
        .pairs()
        .map(|(x, q)| q * (exponent(x) - max_a).exp())
        .sum();
    max_a + shifted.ln()
}

/// An ordered exponent pair with `r > s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPair", into = "RawPair")]
pub struct ExponentPair {
    r: f64,
    s: f64,
}

#[derive(Serialize, Deserialize)]
struct RawPair {
    r: f64,
    s: f64,
}

impl TryFrom<RawPair> for ExponentPair {
    type Error = Error;

    fn try_from(raw: RawPair) -> Result<Self> {
        ExponentPair::new(raw.r, raw.s)
    }
}

impl From<ExponentPair> for RawPair {
    fn from(p: ExponentPair) -> Self {
        RawPair { r: p.r, s: p.s }
    }
}

impl ExponentPair {
    pub fn new(r: f64, s: f64) -> Result<Self> {
        if !r.is_finite() || !s.is_finite() {
            return Err(Error::NonFiniteExponent { r, s });
        }
        if r <= s {
            return Err(Error::ExponentOrder { r, s });
        }
        Ok(ExponentPair { r, s })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// The bound constant `(r - s) / 2`.
    pub fn half_spread(&self) -> f64 {
        0.5 * (self.r - self.s)
    }
}

/// Which side of the two-sided bound is meant.
///
/// `Rhs` is the upper bound `gap <= (r-s) sigma / (2 x_min)`, `Lhs` the lower
/// bound `gap >= (r-s) sigma / (2 x_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "RHS")]
    Rhs,
    #[serde(rename = "LHS")]
    Lhs,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Rhs => "RHS",
            Side::Lhs => "LHS",
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rhs" => Ok(Side::Rhs),
            "lhs" => Ok(Side::Lhs),
            other => Err(format!("unknown side '{other}' (expected lhs or rhs)")),
        }
    }
}

/// Lower bound, gap and upper bound evaluated for one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    /// `(r - s) sigma / (2 x_max)`
    pub lower: f64,
    /// `M_r - M_s`
    pub gap: f64,
    /// `(r - s) sigma / (2 x_min)`; `None` when `x_min = 0`.
    pub upper: Option<f64>,
    /// `gap - lower`; negative means the lower bound is violated.
    pub lhs_residual: f64,
    /// `upper - gap`; negative means the upper bound is violated.
    pub rhs_residual: Option<f64>,
}

impl BoundCheck {
    /// Scale against which residuals are compared: `max(1, |gap|)`.
    pub fn scale(&self) -> f64 {
        self.gap.abs().max(1.0)
    }

    pub fn residual(&self, side: Side) -> Option<f64> {
        match side {
            Side::Lhs => Some(self.lhs_residual),
            Side::Rhs => self.rhs_residual,
        }
    }

    /// True when the residual of `side` is below `-tol * max(1, |gap|)`.
    ///
    /// An undefined upper bound (`x_min = 0`) is never violated.
    pub fn violates(&self, side: Side, tol: f64) -> bool {
        match self.residual(side) {
            Some(residual) => residual < -tol * self.scale(),
            None => false,
        }
    }
}

fn check_exponent(name: &'static str, t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(domain(name, t, "a finite exponent"))
    }
}

/// Weighted power mean `M_r = (sum q_i x_i^r)^(1/r)`.
///
/// `r = 0` is the weighted geometric mean. When `r <= 0` and some value is
/// zero the mean is 0.
pub fn power_mean(sample: &WeightedSample, r: f64) -> Result<f64> {
    check_exponent("r", r)?;
    let (min, max) = (sample.min, sample.max);
    if max == 0.0 || (r <= 0.0 && min == 0.0) {
        return Ok(0.0);
    }
    let mean = if r == 0.0 {
        let log_ratio: f64 = sample.pairs().map(|(x, q)| q * ln_ratio(x, max)).sum();
        max * log_ratio.exp()
    } else {
        let reference = if r > 0.0 { max } else { min };
        reference * (ln_power_sum(sample, r, reference) / r).exp()
    };
    Ok(mean)
}

/// `M_r - M_s` without cancellation between the two means.
///
/// Both means are expressed relative to whichever of `x_min` and `x_max`
/// lies closer to them.
pub fn mean_gap(sample: &WeightedSample, r: f64, s: f64) -> Result<f64> {
    check_exponent("r", r)?;
    check_exponent("s", s)?;
    let (min, max) = (sample.min, sample.max);
    if max == 0.0 {
        return Ok(0.0);
    }
    let from_max = (
        sample.relative_excess(r, max),
        sample.relative_excess(s, max),
    );
    let mut best = (max, from_max, max * (from_max.0.abs() + from_max.1.abs()));
    if min > 0.0 && min < max {
        let from_min = (
            sample.relative_excess(r, min),
            sample.relative_excess(s, min),
        );
        let cost = min * (from_min.0.abs() + from_min.1.abs());
        if cost.is_finite() && cost < best.2 {
            best = (min, from_min, cost);
        }
    }
    let (reference, (excess_r, excess_s), _) = best;
    Ok(reference * (excess_r - excess_s))
}

/// Weighted variance `sigma = sum q_i (x_i - A)^2`.
pub fn variance(sample: &WeightedSample) -> f64 {
    let pivot = sample.values[0];
    let shift: f64 = sample.pairs().map(|(x, q)| q * (x - pivot)).sum();
    sample
        .pairs()
        .map(|(x, q)| {
            let d = (x - pivot) - shift;
            q * d * d
        })
        .sum()
}

/// Evaluates both bounds, the gap and the signed residuals.
pub fn cf_check(sample: &WeightedSample, exps: ExponentPair) -> BoundCheck {
    let sigma = variance(sample);
    let gap = mean_gap(sample, exps.r, exps.s).expect("exponent pair is finite");
    let spread = exps.half_spread() * sigma;
    let lower = if sample.max > 0.0 {
        spread / sample.max
    } else {
        0.0
    };
    let upper = if sample.min > 0.0 {
        Some(spread / sample.min)
    } else if sigma == 0.0 {
        Some(0.0)
    } else {
        None
    };
    BoundCheck {
        lower,
        gap,
        upper,
        lhs_residual: gap - lower,
        rhs_residual: upper.map(|u| u - gap),
    }
}

/// `F = M_r - M_s - (r - s) sigma / 2`.
///
/// With the sample scaled so that `x_min = 1`, `F <= 0` is the upper bound;
/// with `x_max = 1`, `F >= 0` is the lower bound.
pub fn f_value(sample: &WeightedSample, exps: ExponentPair) -> f64 {
    let gap = mean_gap(sample, exps.r, exps.s).expect("exponent pair is finite");
    gap - exps.half_spread() * variance(sample)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair14() -> WeightedSample {
        WeightedSample::new(vec![1.0, 4.0], vec![0.5, 0.5]).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn two_point_means() {
        let s = pair14();
        assert!(close(power_mean(&s, 1.0).unwrap(), 2.5, 1e-15));
        assert!(close(power_mean(&s, 0.0).unwrap(), 2.0, 1e-15));
        assert!(close(power_mean(&s, -1.0).unwrap(), 1.6, 1e-15));
        // (0.5 + 8) ^ (1/2)
        assert!(close(power_mean(&s, 2.0).unwrap(), 8.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn constant_sample_means_are_exact() {
        let s = WeightedSample::new(vec![3.25; 4], vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        for r in [-50.0, -1.0, 0.0, 0.5, 1.0, 7.0, 300.0] {
            assert!(close(power_mean(&s, r).unwrap(), 3.25, 1e-15), "r = {r}");
        }
        assert_eq!(mean_gap(&s, 4.0, -3.0).unwrap(), 0.0);
        assert_eq!(variance(&s), 0.0);
    }

    #[test]
    fn variance_examples() {
        assert!(close(variance(&pair14()), 2.25, 1e-15));
        for q in [0.1, 0.25, 0.5, 0.9] {
            let s = WeightedSample::new(vec![0.0, 1.0], vec![q, 1.0 - q]).unwrap();
            assert!(close(variance(&s), q * (1.0 - q), 1e-15));
        }
    }

    #[test]
    fn cartwright_field_example() {
        let exps = ExponentPair::new(1.0, 0.0).unwrap();
        let check = cf_check(&pair14(), exps);
        assert!(close(check.lower, 0.28125, 1e-15));
        assert!(close(check.gap, 0.5, 1e-15));
        assert!(close(check.upper.unwrap(), 1.125, 1e-15));
        assert!(check.lhs_residual > 0.0);
        assert!(check.rhs_residual.unwrap() > 0.0);
        assert!(!check.violates(Side::Lhs, DEFAULT_TOLERANCE));
        assert!(!check.violates(Side::Rhs, DEFAULT_TOLERANCE));
        assert!(close(f_value(&pair14(), exps), -0.625, 1e-15));
    }

    #[test]
    fn zero_values_follow_limit_convention() {
        let s = WeightedSample::new(vec![0.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert_eq!(power_mean(&s, -1.0).unwrap(), 0.0);
        assert_eq!(power_mean(&s, 0.0).unwrap(), 0.0);
        assert!(close(power_mean(&s, 1.0).unwrap(), 1.0, 1e-15));
        let check = cf_check(&s, ExponentPair::new(1.0, 0.0).unwrap());
        assert_eq!(check.upper, None);
        assert_eq!(check.rhs_residual, None);
        assert!(!check.violates(Side::Rhs, 1e-9));
        assert!(close(check.gap, 1.0, 1e-15));
    }

    #[test]
    fn large_exponents_do_not_overflow() {
        let s = WeightedSample::new(vec![1e200, 1e-200], vec![0.5, 0.5]).unwrap();
        let m = power_mean(&s, 400.0).unwrap();
        assert!(close(m, 1e200 * 0.5f64.powf(1.0 / 400.0), 1e-12));
        let m = power_mean(&s, -400.0).unwrap();
        assert!(close(m / 1e-200, 0.5f64.powf(-1.0 / 400.0), 1e-12));
        assert!(mean_gap(&s, 400.0, -400.0).unwrap().is_finite());
    }

    #[test]
    fn near_degenerate_gap_keeps_relative_accuracy() {
        // weight 1e-14 on 2: A - G = 1e-14 (1 - ln 2) + O(1e-28)
        let v = 1e-14;
        let s = WeightedSample::new(vec![1.0, 2.0], vec![1.0 - v, v]).unwrap();
        let gap = mean_gap(&s, 1.0, 0.0).unwrap();
        let expected = v * (1.0 - std::f64::consts::LN_2);
        assert!(
            (gap - expected).abs() <= 1e-9 * expected,
            "{gap} vs {expected}"
        );
    }

    #[test]
    fn weights_are_renormalized_or_rejected() {
        let s = WeightedSample::new(vec![1.0, 2.0], vec![0.5, 0.5 + 5e-10]).unwrap();
        let sum: f64 = s.weights().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
        let err = WeightedSample::new(vec![1.0, 2.0], vec![0.4, 0.4]).unwrap_err();
        assert!(matches!(err, Error::WeightSum { .. }));
        assert!(err.to_string().contains("sum to 1"));
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert_eq!(
            WeightedSample::new(vec![], vec![]).unwrap_err(),
            Error::EmptySample
        );
        assert!(WeightedSample::new(vec![-1.0], vec![1.0]).is_err());
        assert!(WeightedSample::new(vec![1.0], vec![0.0]).is_err());
        assert!(WeightedSample::new(vec![1.0, 2.0], vec![1.0]).is_err());
        assert!(power_mean(&pair14(), f64::NAN).is_err());
        assert!(ExponentPair::new(1.0, 1.0).is_err());
        assert!(ExponentPair::new(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn side_parsing() {
        assert_eq!("LHS".parse::<Side>().unwrap(), Side::Lhs);
        assert_eq!("rhs".parse::<Side>().unwrap(), Side::Rhs);
        assert!("up".parse::<Side>().is_err());
    }
}
