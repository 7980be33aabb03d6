//! Scalar functionals and polynomial certificates for the two-point problem.
//!
//! With two points `x` and `1` carrying weights `q` and `1 - q`, the residual
//! `F = M_r - M_s - (r - s) sigma / 2` reduces to a handful of explicit
//! functions of `(x, q)`. This module evaluates them: the derivative
//! functional `f1` and its scaled x-derivative `f2`, the boundary limits of
//! `F` as `q` tends to 0 or 1 or `x` tends to 0, the resulting necessary
//! bound on `(r - s) / 2`, the exponent constructions feeding the
//! c-polynomials, and the stationarity relation for `f2`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::means::ExponentPair;

/// Exponents below this magnitude use the series branch of `(x^t - 1) / t`.
pub const SERIES_CUTOFF: f64 = 1e-8;

/// Admissible multiple of `-s` used for `alpha_1` in [`c4`].
///
/// Slightly below `alpha0(5/6, 1/5, -1) = ln(30/26) / ln 5 = 0.088913...`.
pub const C4_ALPHA1_FACTOR: f64 = 0.0889;

/// `(x^t - 1) / t` given `ln x`, continuous through `t = 0`.
pub fn box_cox(t: f64, ln_x: f64) -> f64 {
    if t.abs() < SERIES_CUTOFF {
        let u = t * ln_x;
        ln_x * (1.0 + u / 2.0 + u * u / 6.0)
    } else {
        (t * ln_x).exp_m1() / t
    }
}

/// `ln(q x^t + 1 - q)` given `ln x`.
fn ln_mix(q: f64, t: f64, ln_x: f64) -> f64 {
    let a = t * ln_x;
    if a <= 700.0 {
        (q * a.exp_m1()).ln_1p()
    } else {
        a + (q + (1.0 - q) * (-a).exp()).ln()
    }
}

fn positive_x(x: f64) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x.ln())
    } else {
        Err(domain("x", x, "a finite positive number"))
    }
}

fn nonzero_exponents(exps: ExponentPair) -> Result<(f64, f64)> {
    let (r, s) = (exps.r(), exps.s());
    if r == 0.0 {
        return Err(domain("r", r, "nonzero"));
    }
    if s == 0.0 {
        return Err(domain("s", s, "nonzero"));
    }
    Ok((r, s))
}

fn weight_below_one(q: f64) -> Result<()> {
    if (0.0..1.0).contains(&q) {
        Ok(())
    } else {
        Err(domain("q", q, "in [0, 1)"))
    }
}

/// `F1(x, q) = (q x^r + 1 - q)^((1-r)/r) x^(r-1) - (q x^s + 1 - q)^((1-s)/s) x^(s-1) - (r - s)(1 - q)(x - 1)`.
///
/// This is `dF/(q dx)` for the two-point sample `(1, x)` with weight `q` on
/// `x`.
pub fn f1(x: f64, q: f64, exps: ExponentPair) -> Result<f64> {
    let ln_x = positive_x(x)?;
    weight_below_one(q)?;
    let (r, s) = nonzero_exponents(exps)?;
    let term = |t: f64| ((1.0 - t) / t * ln_mix(q, t, ln_x) + (t - 1.0) * ln_x).exp();
    Ok(term(r) - term(s) - (r - s) * (1.0 - q) * (x - 1.0))
}

/// `F2(x, q) = (r-1)(q + (1-q) x^-r)^((1-2r)/r) x^(-r-1) + (1-s)(q + (1-q) x^-s)^((1-2s)/s) x^(-s-1) - (r - s)`.
///
/// Equals `(1 - q)^-1 dF1/dx`.
pub fn f2(x: f64, q: f64, exps: ExponentPair) -> Result<f64> {
    let ln_x = positive_x(x)?;
    weight_below_one(q)?;
    let (r, s) = nonzero_exponents(exps)?;
    let term = |t: f64| ((1.0 - 2.0 * t) / t * ln_mix(q, t, ln_x) + (t - 2.0) * ln_x).exp();
    Ok((r - 1.0) * term(r) + (1.0 - s) * term(s) - (r - s))
}

/// `lim_{q -> 0+} F(x, 1; q, 1 - q) / q
///  = (x^r - 1)/r - (x^s - 1)/s - (r - s)(x - 1)^2 / 2`.
pub fn limit_q0(x: f64, exps: ExponentPair) -> Result<f64> {
    let ln_x = positive_x(x)?;
    let (r, s) = (exps.r(), exps.s());
    Ok(box_cox(r, ln_x) - box_cox(s, ln_x) - exps.half_spread() * (x - 1.0).powi(2))
}

/// `lim_{q -> 1-} F(x, 1; q, 1 - q) / (1 - q)
///  = (x - x^(1-s))/s - (x - x^(1-r))/r - (r - s)(x - 1)^2 / 2`.
pub fn limit_q1(x: f64, exps: ExponentPair) -> Result<f64> {
    let ln_x = positive_x(x)?;
    let (r, s) = (exps.r(), exps.s());
    // (x - x^(1-t)) / t = x (x^(-t) - 1) / (-t)
    Ok(x * box_cox(-s, ln_x) - x * box_cox(-r, ln_x) - exps.half_spread() * (x - 1.0).powi(2))
}

fn profile_domain(exps: ExponentPair) -> Result<(f64, f64)> {
    let (r, s) = (exps.r(), exps.s());
    if r < 1.0 {
        return Err(domain("r", r, "at least 1"));
    }
    if s >= 0.0 {
        return Err(domain("s", s, "negative"));
    }
    Ok((r, s))
}

/// `y^(1/r - 1) - (r - s)(1 - y)/2`, the limit of `F / y` as `x -> 0+` with
/// weight `y` on the value 1 (for `s < 0`).
pub fn lhs_zero_profile(y: f64, exps: ExponentPair) -> Result<f64> {
    let (r, _) = profile_domain(exps)?;
    if !(y > 0.0 && y <= 1.0) {
        return Err(domain("y", y, "in (0, 1]"));
    }
    Ok(y.powf(1.0 / r - 1.0) - exps.half_spread() * (1.0 - y))
}

/// Minimiser `(2(1 - 1/r)/(r - s))^(1/(2 - 1/r))` of [`lhs_zero_profile`],
/// clamped to `(0, 1]`.
///
/// At `r = 1` the profile is affine in `y` and its infimum is approached as
/// `y -> 0`; the smallest positive double is returned.
pub fn lhs_zero_profile_argmin(exps: ExponentPair) -> Result<f64> {
    let (r, s) = profile_domain(exps)?;
    let z = 1.0 - 1.0 / r;
    let y = (2.0 * z / (r - s)).powf(1.0 / (1.0 + z));
    Ok(y.clamp(f64::MIN_POSITIVE, 1.0))
}

/// `t ln t` with `0 ln 0 = 0`.
fn xlogx(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t.ln()
    }
}

/// `(2 - 1/r)^(2 - 1/r) (1 - 1/r)^-(1 - 1/r)` with `0^0 = 1`.
///
/// Increasing in `r`, equal to 1 at `r = 1`, tending to 4.
pub fn cf_necessary_bound(r: f64) -> Result<f64> {
    if !(r >= 1.0) || !r.is_finite() {
        return Err(domain("r", r, "finite and at least 1"));
    }
    let z = 1.0 - 1.0 / r;
    Ok((xlogx(1.0 + z) - xlogx(z)).exp())
}

pub fn c0(r: f64, s: f64) -> f64 {
    r.powi(3) - (5.0 + 4.0 * s) * r.powi(2) + (2.0 + 6.0 * s + 3.0 * s * s) * r - s * (2.0 + s)
}

/// `c(r, s, alpha1, alpha2)`; a nonpositive value certifies `F2 >= 0` under
/// the bounds of [`AlphaParams`]. `s` must be nonzero unless `alpha1 = 0`.
pub fn c_general(r: f64, s: f64, alpha1: f64, alpha2: f64) -> f64 {
    let alpha1_over_s = if alpha1 == 0.0 { 0.0 } else { alpha1 / s };
    c0(r, s)
        + ((r - 1.0) * (2.0 * r - 1.0) * (1.0 - 3.0 * s)
            + (3.0 * r - 1.0) * (1.0 - 2.0 * s) * (1.0 - s))
            * alpha1_over_s
        + (2.0 * r - 1.0) * (r - 1.0) * alpha2
}

pub fn c1(r: f64, s: f64) -> f64 {
    r.powi(3) - (6.0 + s) * r.powi(2) + (s * s + 4.0) * r - s * (s * s - 6.0 * s + 4.0)
}

pub fn c2(r: f64, s: f64) -> f64 {
    (r - 1.0) * (-1.0 - 2.0 * s) - (1.0 - s) * (1.0 + s)
}

/// `c(r, s, 0, s)`.
pub fn c3(r: f64, s: f64) -> f64 {
    c_general(r, s, 0.0, s)
}

/// `c(r, s, -0.0889 s, (1 - s^2) s / ((r - 1)(r - 2)))`; undefined at
/// `r = 1` and `r = 2`.
pub fn c4(r: f64, s: f64) -> Result<f64> {
    let denom = (r - 1.0) * (r - 2.0);
    if denom == 0.0 {
        return Err(domain("r", r, "different from 1 and 2"));
    }
    Ok(c_general(
        r,
        s,
        -C4_ALPHA1_FACTOR * s,
        (1.0 - s * s) * s / denom,
    ))
}

/// `max(c1, c2, c3, c4)` at `(r, s)`.
pub fn max_certificate(r: f64, s: f64) -> Result<f64> {
    Ok(c1(r, s).max(c2(r, s)).max(c3(r, s)).max(c4(r, s)?))
}

/// Exponents `(alpha1, alpha2)` bounding `q + (1-q) x^-s <= x^alpha1` and the
/// companion linear-in-`q` inequality on a range of weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaParams {
    pub alpha1: f64,
    pub alpha2: f64,
}

impl AlphaParams {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha1 >= 0.0) || !alpha1.is_finite() {
            return Err(domain("alpha1", alpha1, "finite and nonnegative"));
        }
        if !alpha2.is_finite() {
            return Err(domain("alpha2", alpha2, "finite"));
        }
        Ok(AlphaParams { alpha1, alpha2 })
    }

    /// `c(r, s, alpha1, alpha2)`.
    pub fn certificate(&self, r: f64, s: f64) -> f64 {
        c_general(r, s, self.alpha1, self.alpha2)
    }
}

/// Largest admissible `alpha1`: `-s ln((1 - q1) x0 + q1) / ln x0`.
pub fn alpha0(q1: f64, x0: f64, s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q1) {
        return Err(domain("q1", q1, "in [0, 1]"));
    }
    if !(x0 > 0.0 && x0 < 1.0) {
        return Err(domain("x0", x0, "in (0, 1)"));
    }
    if !(-1.0..0.0).contains(&s) {
        return Err(domain("s", s, "in [-1, 0)"));
    }
    let mixed = ((1.0 - q1) * (x0 - 1.0)).ln_1p();
    Ok(-s * mixed / x0.ln())
}

/// `x^alpha1 - (q + (1 - q) x^-s)`; nonnegative whenever
/// `0 <= q <= q1`, `x0 <= x^-s <= 1` and `0 <= alpha1 <= alpha0(q1, x0, s)`.
pub fn alpha1_margin(x: f64, q: f64, alpha1: f64, s: f64) -> f64 {
    x.powf(alpha1) - (q + (1.0 - q) * x.powf(-s))
}

fn alpha2_domain(exps: ExponentPair) -> Result<(f64, f64)> {
    let (r, s) = (exps.r(), exps.s());
    if !(r > 2.0) {
        return Err(domain("r", r, "greater than 2"));
    }
    if !(-1.0..0.0).contains(&s) {
        return Err(domain("s", s, "in [-1, 0)"));
    }
    Ok((r, s))
}

/// `alpha2 = s (1 - s^2) q2 / ((r - 1)(r - 2)(1 - q2))`.
pub fn alpha2_of(q2: f64, exps: ExponentPair) -> Result<f64> {
    let (r, s) = alpha2_domain(exps)?;
    if !(0.5..1.0).contains(&q2) {
        return Err(domain("q2", q2, "in [1/2, 1)"));
    }
    Ok(s * (1.0 - s * s) * q2 / ((r - 1.0) * (r - 2.0) * (1.0 - q2)))
}

/// The weight `q0` at which `alpha2_of(q0) / s = 1`:
/// `q0 = (r-1)(r-2) / ((r-1)(r-2) + 1 - s^2)`.
pub fn q0_of(exps: ExponentPair) -> Result<f64> {
    let (r, s) = alpha2_domain(exps)?;
    let k = (r - 1.0) * (r - 2.0);
    Ok(k / (k + 1.0 - s * s))
}

/// `(1-s)(q(1+s)x^s + (2-s)(1-q)) - x^alpha2 (r-1)(-q(r+1)x^r + (r-2)(1-q))`.
pub fn alpha2_margin(x: f64, q: f64, alpha2: f64, exps: ExponentPair) -> f64 {
    let (r, s) = (exps.r(), exps.s());
    (1.0 - s) * (q * (1.0 + s) * x.powf(s) + (2.0 - s) * (1.0 - q))
        - x.powf(alpha2) * (r - 1.0) * (-q * (r + 1.0) * x.powf(r) + (r - 2.0) * (1.0 - q))
}

/// Log-ratio of the two sides of the stationarity relation of `x -> f2(x, q)`:
///
/// `(q x^r + 1 - q)^((1-3r)/r) x^(r-2)
///    = N / ((r-1) D) (q + (1-q) x^-s)^((1-3s)/s) x^(-1-2s)`
///
/// with `N = (1-s)(q(1+s)x^s + (2-s)(1-q))` and
/// `D = -q(r+1)x^r + (r-2)(1-q)`. Zero at interior critical points.
/// Fails with [`Error::NoCriticalPoint`] when `D <= 0` or `N / ((r-1) D) <= 0`,
/// where no critical point can exist.
pub fn critical_residual(x: f64, q: f64, exps: ExponentPair) -> Result<f64> {
    let ln_x = positive_x(x)?;
    if !(q > 0.0 && q < 1.0) {
        return Err(domain("q", q, "in (0, 1)"));
    }
    let (r, s) = nonzero_exponents(exps)?;
    let d = -q * (r + 1.0) * (r * ln_x).exp() + (r - 2.0) * (1.0 - q);
    if !(d > 0.0) {
        return Err(Error::NoCriticalPoint("-q(r+1)x^r + (r-2)(1-q) <= 0"));
    }
    let n = (1.0 - s) * (q * (1.0 + s) * (s * ln_x).exp() + (2.0 - s) * (1.0 - q));
    let ratio = n / ((r - 1.0) * d);
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(Error::NoCriticalPoint("stationarity ratio is not positive"));
    }
    let left = (1.0 - 3.0 * r) / r * ln_mix(q, r, ln_x) + (r - 2.0) * ln_x;
    // q + (1-q) x^-s = (q x^s + 1 - q) x^-s
    let right = ratio.ln()
        + (1.0 - 3.0 * s) / s * (ln_mix(q, s, ln_x) - s * ln_x)
        + (-1.0 - 2.0 * s) * ln_x;
    Ok(left - right)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(r: f64, s: f64) -> ExponentPair {
        ExponentPair::new(r, s).unwrap()
    }

    #[test]
    fn f1_f2_vanish_at_one() {
        for (r, s) in [(2.0, 1.0), (3.0, -0.5), (0.5, -0.3), (-1.0, -2.0)] {
            for q in [0.0, 0.3, 0.9] {
                assert!(f1(1.0, q, pair(r, s)).unwrap().abs() < 1e-15);
                assert!(f2(1.0, q, pair(r, s)).unwrap().abs() < 1e-14);
            }
        }
    }

    #[test]
    fn f1_f2_reference_values() {
        let p = pair(2.0, 1.0);
        // 2/sqrt(2.5) - 1.5 and 0.625^-1.5 / 8 - 1
        assert!((f1(2.0, 0.5, p).unwrap() - (-0.235_088_935_932_648_27)).abs() < 1e-14);
        assert!((f2(2.0, 0.5, p).unwrap() - (-0.747_017_787_186_529_6)).abs() < 1e-14);
    }

    #[test]
    fn zero_exponents_rejected_by_f1_f2() {
        assert!(f1(2.0, 0.5, pair(1.0, 0.0)).is_err());
        assert!(f2(2.0, 0.5, pair(0.0, -1.0)).is_err());
        assert!(f1(0.0, 0.5, pair(2.0, 1.0)).is_err());
        assert!(f1(2.0, 1.0, pair(2.0, 1.0)).is_err());
    }

    #[test]
    fn limits_vanish_at_one_and_have_expected_signs() {
        let p = pair(2.5, 0.5);
        assert_eq!(limit_q0(1.0, p).unwrap(), 0.0);
        assert_eq!(limit_q1(1.0, p).unwrap(), 0.0);
        assert!(limit_q0(100.0, p).unwrap() > 0.0);
        assert!(limit_q1(1e-9, pair(0.9, 0.5)).unwrap() < 0.0);
        assert!(limit_q0(0.0, p).is_err());
    }

    #[test]
    fn limits_accept_zero_exponent() {
        // (x - 1) - ln x - (x - 1)^2 / 2 at x = 2
        let v = limit_q0(2.0, pair(1.0, 0.0)).unwrap();
        assert!((v - (1.0 - std::f64::consts::LN_2 - 0.5)).abs() < 1e-15);
        let near = limit_q0(2.0, pair(1.0, 1e-10)).unwrap();
        assert!((near - v).abs() < 1e-9);
    }

    #[test]
    fn profile_examples() {
        assert_eq!(lhs_zero_profile(1.0, pair(2.0, -1.0)).unwrap(), 1.0);
        let y = lhs_zero_profile_argmin(pair(2.0, -1.0)).unwrap();
        assert!((y - 0.480_749_856_769_136_1).abs() < 1e-15);
        assert!(lhs_zero_profile(y, pair(2.0, -1.0)).unwrap() >= 0.0);
        // r = 1: constant term 1, infimum 1 - (r - s)/2 approached at y -> 0
        let p = pair(1.0, -0.5);
        let y = lhs_zero_profile_argmin(p).unwrap();
        assert!(y > 0.0 && y < 1e-300);
        assert!((lhs_zero_profile(y, p).unwrap() - 0.25).abs() < 1e-15);
        assert!(lhs_zero_profile(0.5, pair(0.9, -0.5)).is_err());
    }

    #[test]
    fn necessary_bound_anchors() {
        assert_eq!(cf_necessary_bound(1.0).unwrap(), 1.0);
        assert!((cf_necessary_bound(2.0).unwrap() - 6.75f64.sqrt()).abs() < 1e-14);
        let big = cf_necessary_bound(1e6).unwrap();
        assert!((3.997..=4.0).contains(&big));
        assert!(cf_necessary_bound(0.5).is_err());
    }

    #[test]
    fn certificate_polynomials() {
        assert!(c0(3.0, -0.5).abs() <= 1e-12);
        assert!((c0(2.0, -0.5) + 3.75).abs() <= 1e-12);
        assert!((c3(3.5, -0.5) + 1.5).abs() <= 1e-12);
        assert!((c2(2.8, -0.6) + 0.28).abs() <= 1e-12);
        assert!((c1(2.8, -0.6) + 3.4).abs() <= 1e-12);
        assert!((c3(2.8, -0.6) + 4.016).abs() <= 1e-12);
        assert!((c4(2.8, -0.6).unwrap() + 5.632_724_8).abs() <= 1e-12);
        assert!(c4(2.0, -0.5).is_err());
        assert!(c4(1.0, -0.5).is_err());
    }

    #[test]
    fn certificate_closed_forms_at_right_endpoint() {
        for s in [-0.5f64, -0.3, -0.1] {
            let r = 3.0 - s;
            let c3_closed = -12.0 - 9.0 * s + 21.0 * s * s - 6.0 * s.powi(3);
            let c4_closed = -12.0 - 14.0 * s + 33.0 * s * s
                - 10.0 * s.powi(3)
                - 0.0889 * (18.0 - 66.0 * s + 54.0 * s * s - 12.0 * s.powi(3));
            assert!((c3(r, s) - c3_closed).abs() < 1e-12);
            assert!((c4(r, s).unwrap() - c4_closed).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_constructions() {
        let a = alpha0(5.0 / 6.0, 0.2, -1.0).unwrap();
        assert!((a - 0.088_913_553_318_903).abs() < 1e-14);
        assert!(C4_ALPHA1_FACTOR <= a);
        assert_eq!(alpha0(1.0, 0.3, -0.5).unwrap(), 0.0);
        let half = alpha0(5.0 / 6.0, 0.2, -0.5).unwrap();
        assert!((2.0 * half - a).abs() < 1e-15);
        assert!(alpha0(0.5, 1.0, -0.5).is_err());

        let p = pair(2.5, -0.5);
        let q0 = q0_of(p).unwrap();
        assert!((q0 - 0.5).abs() < 1e-15);
        assert!((alpha2_of(q0, p).unwrap() / -0.5 - 1.0).abs() < 1e-15);
        assert!(q0_of(pair(2.0, -0.5)).is_err());
        assert!(alpha2_of(1.0, p).is_err());
    }

    #[test]
    fn alpha_params_validation() {
        assert!(AlphaParams::new(-0.1, 0.0).is_err());
        let params = AlphaParams::new(0.0, -0.5).unwrap();
        assert_eq!(params.certificate(3.5, -0.5), c3(3.5, -0.5));
    }

    #[test]
    fn alpha2_margin_trivial_at_full_weight() {
        // q = 1: (1-s)(1+s)x^s + x^alpha2 (r-1)(r+1) x^r > 0
        let p = pair(2.8, -0.4);
        let a2 = alpha2_of(q0_of(p).unwrap(), p).unwrap();
        for x in [1e-3, 0.1, 0.5, 1.0] {
            assert!(alpha2_margin(x, 1.0, a2, p) > 0.0);
        }
    }

    #[test]
    fn critical_residual_rejects_empty_region() {
        let p = pair(2.5, -0.3);
        // q close to 1: D = -q(r+1)x^r + (r-2)(1-q) < 0 near x = 1
        for x in [0.9, 1.0, 1.1] {
            assert!(matches!(
                critical_residual(x, 0.99, p),
                Err(Error::NoCriticalPoint(_))
            ));
        }
        let generic = critical_residual(0.5, 0.2, p).unwrap();
        assert!(generic.abs() > 1e-3);
    }
}
