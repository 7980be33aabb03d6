//! Counterexample search over two-point samples.
//!
//! Extremal configurations of the residual sit at two distinct values with
//! one weight near a boundary, so the search space is the two-point sample
//! `(x, 1)` with weight `q` on `x`, parametrised as `u = ln x` and
//! `t = logit q`. The sample is scaled so that `x_min = 1` when the upper
//! bound is searched and `x_max = 1` for the lower bound.
//!
//! A search runs a log-spaced grid, then refines seeds taken from the
//! boundary-limit functionals, then the best grid cells, then random
//! restarts, each with coordinate descent. Every stage is deterministic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::{lhs_zero_profile, lhs_zero_profile_argmin, limit_q0, limit_q1};
use crate::means::{cf_check, ExponentPair, Side, WeightedSample, DEFAULT_TOLERANCE};

/// Grid range for `x`.
pub const GRID_X_RANGE: (f64, f64) = (1e-8, 1e8);
/// Grid range for the weight on `x`, away from the near-boundary extras.
pub const GRID_Q_RANGE: (f64, f64) = (1e-9, 1.0 - 1e-9);
/// Near-boundary weights always present in the grid.
pub const GRID_Q_EXTRAS: [f64; 2] = [1e-6, 1.0 - 1e-6];

/// Coordinate-descent rounds; the step halves after each round.
pub const REFINE_ROUNDS: usize = 20;
const REFINE_SHRINK: f64 = 0.5;
const REFINE_INITIAL_STEP: f64 = 2.0;
const REFINE_MAX_MOVES: usize = 32;
/// Bounds on `ln x` and `logit q` while refining.
const U_LIMIT: f64 = 345.0;
const T_LIMIT: f64 = 45.0;
/// Top grid cells refined when the grid itself finds nothing.
const TOP_CELLS: usize = 4;
const SEED_WEIGHTS: [f64; 3] = [1e-2, 1e-5, 1e-9];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Grid,
    Refine,
    LimitSeed,
}

/// A concrete sample violating one side of the bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub side: Side,
    pub exps: ExponentPair,
    pub sample: WeightedSample,
    /// Residual of `side` at `sample`; negative.
    pub residual: f64,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    /// Maximum number of residual evaluations.
    pub budget: usize,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 100_000,
            seed: 0,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Point {
    u: f64,
    t: f64,
}

impl Point {
    fn clamped(u: f64, t: f64) -> Self {
        Point {
            u: u.clamp(-U_LIMIT, U_LIMIT),
            t: t.clamp(-T_LIMIT, T_LIMIT),
        }
    }

    fn axis(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.u
        } else {
            self.t
        }
    }

    fn moved(&self, axis: usize, delta: f64) -> Self {
        if axis == 0 {
            Point::clamped(self.u + delta, self.t)
        } else {
            Point::clamped(self.u, self.t + delta)
        }
    }
}

fn logit(q: f64) -> f64 {
    (q / (1.0 - q)).ln()
}

/// Two-point sample for `(u, t)` in the normalisation of `side`.
fn two_point_sample(side: Side, p: Point) -> WeightedSample {
    // weight on x and on the other point, both accurate near 0
    let on_x = 1.0 / (1.0 + (-p.t).exp());
    let on_one = 1.0 / (1.0 + p.t.exp());
    let x = p.u.exp();
    let (values, weights) = match (side, p.u >= 0.0) {
        // x_min = 1
        (Side::Rhs, true) => (vec![1.0, x], vec![on_one, on_x]),
        (Side::Rhs, false) => (vec![1.0, (-p.u).exp()], vec![on_x, on_one]),
        // x_max = 1
        (Side::Lhs, false) => (vec![x, 1.0], vec![on_x, on_one]),
        (Side::Lhs, true) => (vec![(-p.u).exp(), 1.0], vec![on_one, on_x]),
    };
    WeightedSample::new(values, weights).expect("two-point sample is valid")
}

/// Residual of `side` divided by `max(1, |gap|)`.
fn normalized_residual(exps: ExponentPair, side: Side, p: Point) -> f64 {
    let check = cf_check(&two_point_sample(side, p), exps);
    match check.residual(side) {
        Some(r) if r.is_finite() => r / check.scale(),
        _ => f64::INFINITY,
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

struct Search {
    exps: ExponentPair,
    side: Side,
    tolerance: f64,
    remaining: usize,
}

impl Search {
    fn violates(&self, value: f64) -> bool {
        value < -self.tolerance
    }

    fn eval(&mut self, p: Point) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(normalized_residual(self.exps, self.side, p))
    }

    /// Coordinate descent with geometric step shrinkage.
    fn refine(&mut self, start: Point, start_value: f64) -> (Point, f64) {
        let (mut best, mut best_value) = (start, start_value);
        let mut step = [REFINE_INITIAL_STEP; 2];
        for _ in 0..REFINE_ROUNDS {
            for axis in 0..2 {
                for _ in 0..REFINE_MAX_MOVES {
                    let mut moved = false;
                    for direction in [1.0, -1.0] {
                        let candidate = best.moved(axis, direction * step[axis]);
                        if candidate.axis(axis) == best.axis(axis) {
                            continue;
                        }
                        let Some(value) = self.eval(candidate) else {
                            return (best, best_value);
                        };
                        if value < best_value {
                            best = candidate;
                            best_value = value;
                            moved = true;
                            break;
                        }
                    }
                    if !moved {
                        break;
                    }
                }
                step[axis] *= REFINE_SHRINK;
            }
        }
        (best, best_value)
    }

    fn certificate(&self, p: Point, provenance: Provenance) -> Certificate {
        let sample = two_point_sample(self.side, p);
        let check = cf_check(&sample, self.exps);
        Certificate {
            side: self.side,
            exps: self.exps,
            residual: check.residual(self.side).expect("positive minimum"),
            sample,
            provenance,
        }
    }

    /// Grid cells in row-major order (x outer, weight inner).
    fn grid(&self, cells: usize) -> Vec<Point> {
        let side = ((cells as f64).sqrt() as usize).max(1);
        let us = linspace(GRID_X_RANGE.0.ln(), GRID_X_RANGE.1.ln(), side);
        let mut ts = linspace(logit(GRID_Q_RANGE.0), logit(GRID_Q_RANGE.1), side);
        ts.extend(GRID_Q_EXTRAS.iter().map(|&q| logit(q)));
        us.iter()
            .flat_map(|&u| ts.iter().map(move |&t| Point { u, t }))
            .collect()
    }

    /// Seeds from the boundary-limit functionals.
    fn limit_seeds(&mut self) -> Vec<Point> {
        let (exps, side) = (self.exps, self.side);
        let mut us = linspace(-69.0, 69.0, 1381);
        for k in 1..=6 {
            let tiny = 10f64.powi(-k);
            us.extend([tiny, -tiny]);
        }
        // Violation needs x >= 1 for the upper bound and x <= 1 for the lower.
        us.retain(|&u| match side {
            Side::Rhs => u > 0.0,
            Side::Lhs => u < 0.0,
        });
        let bad = |value: f64| match side {
            Side::Rhs => value > 0.0,
            Side::Lhs => value < 0.0,
        };

        let mut seeds = Vec::new();
        type Limit = fn(f64, ExponentPair) -> Result<f64>;
        let limits: [(Limit, bool); 2] = [(limit_q0, false), (limit_q1, true)];
        for (limit, near_one) in limits {
            let n = us.len().min(self.remaining);
            self.remaining -= n;
            let hits: Vec<f64> = us[..n]
                .iter()
                .copied()
                .filter(|&u| limit(u.exp(), exps).map(bad).unwrap_or(false))
                .collect();
            let closest = hits
                .iter()
                .copied()
                .min_by(|a, b| a.abs().total_cmp(&b.abs()));
            let farthest = hits
                .iter()
                .copied()
                .max_by(|a, b| a.abs().total_cmp(&b.abs()));
            for u in closest.into_iter().chain(farthest) {
                for w in SEED_WEIGHTS {
                    let t = if near_one { -logit(w) } else { logit(w) };
                    seeds.push(Point::clamped(u, t));
                }
            }
        }

        if side == Side::Lhs && exps.s() < 0.0 && exps.r() >= 1.0 && self.remaining > 0 {
            self.remaining -= 1;
            let y = lhs_zero_profile_argmin(exps).expect("r >= 1, s < 0");
            if lhs_zero_profile(y, exps).map(|v| v < 0.0).unwrap_or(false) {
                // weight y on the value 1, x -> 0
                seeds.push(Point::clamped(-69.0, -logit(y)));
            }
        }
        seeds.dedup();
        seeds
    }

    fn run(&mut self, seed: u64) -> Option<Certificate> {
        let mut grid = self.grid(self.remaining / 2);
        grid.truncate(self.remaining);
        self.remaining -= grid.len();
        let (exps, side) = (self.exps, self.side);
        let values: Vec<f64> = grid
            .par_iter()
            .map(|&p| normalized_residual(exps, side, p))
            .collect();
        let mut order: Vec<usize> = (0..grid.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

        if let Some(&best) = order.first() {
            if self.violates(values[best]) {
                let (p, value) = self.refine(grid[best], values[best]);
                let provenance = if value < values[best] {
                    Provenance::Refine
                } else {
                    Provenance::Grid
                };
                return Some(self.certificate(p, provenance));
            }
        }

        for start in self.limit_seeds() {
            let Some(value) = self.eval(start) else { break };
            let (p, value) = self.refine(start, value);
            if self.violates(value) {
                return Some(self.certificate(p, Provenance::LimitSeed));
            }
        }

        for &index in order.iter().take(TOP_CELLS) {
            let (p, value) = self.refine(grid[index], values[index]);
            if self.violates(value) {
                return Some(self.certificate(p, Provenance::Refine));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u_span = GRID_X_RANGE.1.ln();
        let t_span = logit(GRID_Q_RANGE.1);
        while self.remaining > 0 {
            let start = Point {
                u: rng.gen_range(-u_span..u_span),
                t: rng.gen_range(-t_span..t_span),
            };
            let Some(value) = self.eval(start) else { break };
            let (p, value) = self.refine(start, value);
            if self.violates(value) {
                return Some(self.certificate(p, Provenance::Refine));
            }
        }
        None
    }
}

/// Searches two-point samples for a violation of `side`.
///
/// Returns `Ok(None)` when the budget is exhausted without finding a
/// residual below `-tolerance * max(1, |gap|)`.
pub fn search_counterexample(
    exps: ExponentPair,
    side: Side,
    config: &SearchConfig,
) -> Result<Option<Certificate>> {
    if exps.r() <= exps.s() {
        return Err(Error::ExponentOrder {
            r: exps.r(),
            s: exps.s(),
        });
    }
    if config.budget == 0 {
        return Err(Error::InvalidGrid(
            "search budget must be at least 1".into(),
        ));
    }
    if !(config.tolerance > 0.0) {
        return Err(crate::error::domain(
            "tolerance",
            config.tolerance,
            "positive",
        ));
    }
    let mut search = Search {
        exps,
        side,
        tolerance: config.tolerance,
        remaining: config.budget,
    };
    Ok(search.run(config.seed))
}

/// Extremal value of `F` found by exhaustive grid evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub x: f64,
    /// Weight on `x`; the value 1 carries `1 - q`.
    pub q: f64,
    /// Maximum of `F` for the upper bound, minimum for the lower bound.
    pub value: f64,
}

impl Extremum {
    /// Whether the extremum violates `side` beyond an absolute tolerance.
    pub fn violates(&self, side: Side, tol: f64) -> bool {
        match side {
            Side::Rhs => self.value > tol,
            Side::Lhs => self.value < -tol,
        }
    }
}

/// `F(x, 1; q, 1 - q)` evaluated directly from the definition of the means.
fn two_point_f(r: f64, s: f64, x: f64, q: f64, p: f64) -> f64 {
    let mean = |t: f64| {
        if t == 0.0 {
            x.powf(q)
        } else {
            (q * x.powf(t) + p).powf(1.0 / t)
        }
    };
    mean(r) - mean(s) - 0.5 * (r - s) * q * p * (x - 1.0) * (x - 1.0)
}

/// Exhaustive `grid_n x grid_n` scan of `F` over two-point samples.
///
/// `x` is log-spaced over `[1, 1e8]` for the upper bound (so `x_min = 1`)
/// and over `[1e-8, 1]` for the lower bound (`x_max = 1`); the weight on `x`
/// is logit-spaced over `[1e-9, 1 - 1e-9]`. Evaluates the closed two-point
/// formula with plain `powf`, independently of [`cf_check`].
pub fn brute_force_extremum(exps: ExponentPair, side: Side, grid_n: usize) -> Result<Extremum> {
    if grid_n < 8 {
        return Err(Error::InvalidGrid(format!("grid size {grid_n} is below 8")));
    }
    let (r, s) = (exps.r(), exps.s());
    let decades = GRID_X_RANGE.1.log10();
    let xs: Vec<f64> = (0..grid_n)
        .map(|i| {
            let e = decades * i as f64 / (grid_n - 1) as f64;
            match side {
                Side::Rhs => 10f64.powf(e),
                Side::Lhs => 10f64.powf(e - decades),
            }
        })
        .collect();
    let ts = linspace(logit(GRID_Q_RANGE.0), logit(GRID_Q_RANGE.1), grid_n);
    let sign = match side {
        Side::Rhs => -1.0,
        Side::Lhs => 1.0,
    };
    // Per-row minima of sign * F, reduced in row order.
    let rows: Vec<Extremum> = xs
        .par_iter()
        .map(|&x| {
            let mut best = Extremum {
                x,
                q: f64::NAN,
                value: f64::INFINITY,
            };
            for &t in &ts {
                let q = 1.0 / (1.0 + (-t).exp());
                let p = 1.0 / (1.0 + t.exp());
                let value = sign * two_point_f(r, s, x, q, p);
                if value < best.value {
                    best = Extremum { x, q, value };
                }
            }
            best
        })
        .collect();
    let best = rows
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("grid is non-empty");
    Ok(Extremum {
        value: sign * best.value,
        ..best
    })
}

/// Neumaier-compensated sum over an iterator.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for term in terms {
        let next = sum + term;
        if sum.abs() >= term.abs() {
            carry += (sum - next) + term;
        } else {
            carry += (term - next) + sum;
        }
        sum = next;
    }
    sum + carry
}

/// Independent recomputation of `(gap, lower, upper)`.
///
/// Terms are summed in reverse order with compensation, the variance uses
/// the pairwise form `sum_{i<j} q_i q_j (x_i - x_j)^2`, and both means are
/// taken relative to the extreme value nearer the geometric centre.
fn recheck(sample: &WeightedSample, exps: ExponentPair) -> (f64, f64, Option<f64>) {
    let xs: Vec<f64> = sample.values().iter().rev().copied().collect();
    let qs: Vec<f64> = sample.weights().iter().rev().copied().collect();
    let (min, max) = (sample.min(), sample.max());
    let total = compensated_sum(qs.iter().copied());

    let mut pairwise = Vec::new();
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            let d = xs[i] - xs[j];
            pairwise.push(qs[i] * qs[j] * d * d);
        }
    }
    let sigma = compensated_sum(pairwise.into_iter()) / (total * total);

    let excess = |t: f64, reference: f64| -> f64 {
        let logs: Vec<f64> = xs.iter().map(|&x| (x / reference).ln()).collect();
        if t == 0.0 {
            let g = compensated_sum(qs.iter().zip(&logs).map(|(q, l)| q * l)) / total;
            return g.exp_m1();
        }
        if t < 0.0 && min == 0.0 {
            return -1.0;
        }
        let a: Vec<f64> = logs.iter().map(|l| t * l).collect();
        let top = a.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ln_sum = if top <= 700.0 {
            let s = compensated_sum(qs.iter().zip(&a).map(|(q, a)| q * a.exp_m1())) - (total - 1.0);
            if s.abs() <= 0.5 {
                Some(s.ln_1p() - total.ln())
            } else {
                None
            }
        } else {
            None
        };
        let ln_sum = ln_sum.unwrap_or_else(|| {
            let shifted = compensated_sum(qs.iter().zip(&a).map(|(q, a)| q * (a - top).exp()));
            top + (shifted / total).ln()
        });
        (ln_sum / t).exp_m1()
    };

    let gap = if max == 0.0 {
        0.0
    } else {
        let centre = compensated_sum(qs.iter().zip(&xs).map(|(q, &x)| {
            if x > 0.0 {
                q * x.ln()
            } else {
                f64::NEG_INFINITY
            }
        })) / total;
        let use_min = min > 0.0 && (centre - min.ln()) < (max.ln() - centre);
        let by_min = use_min
            .then(|| min * (excess(exps.r(), min) - excess(exps.s(), min)))
            .filter(|g| g.is_finite());
        by_min.unwrap_or_else(|| max * (excess(exps.r(), max) - excess(exps.s(), max)))
    };
    let spread = exps.half_spread() * sigma;
    let lower = if max > 0.0 { spread / max } else { 0.0 };
    let upper = if min > 0.0 {
        Some(spread / min)
    } else if sigma == 0.0 {
        Some(0.0)
    } else {
        None
    };
    (gap, lower, upper)
}

/// Re-derives the violation claimed by `cert` and confirms it exceeds
/// `tolerance / 10` relative to `max(1, |gap|)`.
pub fn verify_certificate(cert: &Certificate, tolerance: f64) -> Result<bool> {
    if !cert.residual.is_finite() {
        return Err(Error::MalformedCertificate(format!(
            "residual {} is not finite",
            cert.residual
        )));
    }
    if !(tolerance > 0.0) {
        return Err(crate::error::domain("tolerance", tolerance, "positive"));
    }
    let (gap, lower, upper) = recheck(&cert.sample, cert.exps);
    let residual = match cert.side {
        Side::Lhs => gap - lower,
        Side::Rhs => match upper {
            Some(upper) => upper - gap,
            None => return Ok(false),
        },
    };
    Ok(residual < -(tolerance / 10.0) * gap.abs().max(1.0))
}
