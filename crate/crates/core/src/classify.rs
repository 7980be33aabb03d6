//! Exponent-pair classification for each side of the two-sided bound.
//!
//! The upper bound has a complete characterisation. The lower bound is
//! characterised for `-1/2 <= s <= 1`; outside that strip the classifier
//! applies the known necessary conditions, then the known sufficient ones,
//! and reports everything in between as unknown.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lab::{cf_necessary_bound, max_certificate};
use crate::means::{ExponentPair, Side};

/// Tolerance for "nonpositive" in the c-polynomial sign test.
pub const CERTIFICATE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Holds,
    Fails,
    Unknown,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "HOLDS",
            Verdict::Fails => "FAILS",
            Verdict::Unknown => "UNKNOWN",
        }
    }
}

/// Source of a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Citation {
    /// Complete characterisation of the upper bound.
    #[serde(rename = "thm1-rhs")]
    Thm1Rhs,
    /// Characterisation of the lower bound for `-1/2 <= s <= 1`.
    #[serde(rename = "thm1-lhs")]
    Thm1Lhs,
    /// Previously known cases: `1 <= r <= 2, -1 <= s <= 1`, and `s = 0`.
    #[serde(rename = "lem0")]
    Lem0,
    /// Necessary conditions from the two-point boundary limits.
    #[serde(rename = "lem1-necessary")]
    Lem1Necessary,
    /// Necessary bound on `(r - s)/2` from the `x -> 0` profile, for `s < 0`.
    #[serde(rename = "eq2.2")]
    Eq2_2,
    /// Corollary `s >= -4` of the profile bound.
    #[serde(rename = "remark-s>=-4")]
    RemarkS4,
    /// Lower bound holds when `(r-1)(r-2) <= 1 - s^2`.
    #[serde(rename = "thm3-a")]
    Thm3A,
    /// Lower bound holds for `-1 < s < -1/2, 2 < r < 3 - s` with all
    /// c-polynomials nonpositive.
    #[serde(rename = "thm3-b")]
    Thm3B,
}

impl Citation {
    pub fn as_str(self) -> &'static str {
        match self {
            Citation::Thm1Rhs => "thm1-rhs",
            Citation::Thm1Lhs => "thm1-lhs",
            Citation::Lem0 => "lem0",
            Citation::Lem1Necessary => "lem1-necessary",
            Citation::Eq2_2 => "eq2.2",
            Citation::RemarkS4 => "remark-s>=-4",
            Citation::Thm3A => "thm3-a",
            Citation::Thm3B => "thm3-b",
        }
    }
}

/// Verdict for one side of the bound at one exponent pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub side: Side,
    pub verdict: Verdict,
    /// Always present for `Holds` and `Fails`; absent for `Unknown`.
    pub citation: Option<Citation>,
    /// The predicate that decided the verdict.
    pub detail: String,
    /// Necessary conditions checked and satisfied (filled for `Unknown`).
    pub passed: Vec<String>,
}

/// A named predicate on `(r, s)`.
struct Condition {
    label: &'static str,
    citation: Citation,
    ok: bool,
}

fn rhs_conditions(r: f64, s: f64) -> [Condition; 4] {
    [
        Condition {
            label: "r + s >= 0",
            citation: Citation::Lem1Necessary,
            ok: r + s >= 0.0,
        },
        Condition {
            label: "r + s <= 3",
            citation: Citation::Lem1Necessary,
            ok: r + s <= 3.0,
        },
        Condition {
            label: "r <= 2",
            citation: Citation::Lem1Necessary,
            ok: r <= 2.0,
        },
        Condition {
            label: "s >= -1",
            citation: Citation::Lem1Necessary,
            ok: s >= -1.0,
        },
    ]
}

/// Necessary conditions for the lower bound, in citation-priority order.
fn lhs_conditions(r: f64, s: f64) -> Vec<Condition> {
    let mut conditions = vec![
        Condition {
            label: "r >= 1",
            citation: Citation::Lem1Necessary,
            ok: r >= 1.0,
        },
        Condition {
            label: "r + s >= 0",
            citation: Citation::Lem1Necessary,
            ok: r + s >= 0.0,
        },
        Condition {
            label: "r + s <= 3",
            citation: Citation::Lem1Necessary,
            ok: r + s <= 3.0,
        },
        Condition {
            label: "r s <= 2",
            citation: Citation::Lem1Necessary,
            ok: r * s <= 2.0,
        },
    ];
    if s < 0.0 {
        conditions.push(Condition {
            label: "s >= -4",
            citation: Citation::RemarkS4,
            ok: s >= -4.0,
        });
        // The bound is only defined for r >= 1; r < 1 has already failed above.
        let ok = r < 1.0 || 0.5 * (r - s) <= cf_necessary_bound(r).expect("r >= 1");
        conditions.push(Condition {
            label: "(r - s)/2 <= (2 - 1/r)^(2 - 1/r) (1 - 1/r)^-(1 - 1/r)",
            citation: Citation::Eq2_2,
            ok,
        });
    }
    conditions
}

fn failed_labels(conditions: &[Condition]) -> String {
    conditions
        .iter()
        .filter(|c| !c.ok)
        .map(|c| format!("violates {}", c.label))
        .collect::<Vec<_>>()
        .join("; ")
}

fn holds(side: Side, citation: Citation, detail: impl Into<String>) -> Classification {
    Classification {
        side,
        verdict: Verdict::Holds,
        citation: Some(citation),
        detail: detail.into(),
        passed: Vec::new(),
    }
}

fn fails(side: Side, conditions: &[Condition]) -> Classification {
    let first = conditions
        .iter()
        .find(|c| !c.ok)
        .expect("at least one failed condition");
    Classification {
        side,
        verdict: Verdict::Fails,
        citation: Some(first.citation),
        detail: failed_labels(conditions),
        passed: Vec::new(),
    }
}

fn in_known_box(r: f64, s: f64) -> bool {
    (1.0..=2.0).contains(&r) && (-1.0..=1.0).contains(&s)
}

fn check_order(exps: ExponentPair) -> Result<(f64, f64)> {
    let (r, s) = (exps.r(), exps.s());
    if r <= s {
        return Err(Error::ExponentOrder { r, s });
    }
    Ok((r, s))
}

/// Verdict for the upper bound `gap <= (r-s) sigma / (2 x_min)`.
///
/// Holds iff `0 <= r + s <= 3`, `r <= 2` and `s >= -1`; never `Unknown`.
pub fn classify_rhs(exps: ExponentPair) -> Result<Classification> {
    let (r, s) = check_order(exps)?;
    let conditions = rhs_conditions(r, s);
    if conditions.iter().all(|c| c.ok) {
        let citation = if in_known_box(r, s) || s == 0.0 {
            Citation::Lem0
        } else {
            Citation::Thm1Rhs
        };
        Ok(holds(
            Side::Rhs,
            citation,
            "0 <= r + s <= 3, r <= 2, s >= -1",
        ))
    } else {
        Ok(fails(Side::Rhs, &conditions))
    }
}

/// Verdict for the lower bound `gap >= (r-s) sigma / (2 x_max)`.
pub fn classify_lhs(exps: ExponentPair) -> Result<Classification> {
    let (r, s) = check_order(exps)?;
    if (-0.5..=1.0).contains(&s) {
        let conditions = &lhs_conditions(r, s)[..3];
        if conditions.iter().all(|c| c.ok) {
            let citation = if in_known_box(r, s) || s == 0.0 {
                Citation::Lem0
            } else {
                Citation::Thm1Lhs
            };
            return Ok(holds(
                Side::Lhs,
                citation,
                "0 <= r + s <= 3, r >= 1 with -1/2 <= s <= 1",
            ));
        }
        return Ok(fails(Side::Lhs, conditions));
    }

    let conditions = lhs_conditions(r, s);
    if conditions.iter().any(|c| !c.ok) {
        return Ok(fails(Side::Lhs, &conditions));
    }
    if in_known_box(r, s) {
        return Ok(holds(
            Side::Lhs,
            Citation::Lem0,
            "1 <= r <= 2, -1 <= s <= 1",
        ));
    }
    if (r - 1.0) * (r - 2.0) <= 1.0 - s * s {
        return Ok(holds(
            Side::Lhs,
            Citation::Thm3A,
            "(r - 1)(r - 2) <= 1 - s^2",
        ));
    }
    if -1.0 < s && s < -0.5 && 2.0 < r && r < 3.0 - s {
        let worst = max_certificate(r, s).expect("r > 2");
        if worst <= CERTIFICATE_SLACK {
            return Ok(holds(
                Side::Lhs,
                Citation::Thm3B,
                format!("-1 < s < -1/2, 2 < r < 3 - s, max c_i = {worst:e} <= 0"),
            ));
        }
    }
    Ok(Classification {
        side: Side::Lhs,
        verdict: Verdict::Unknown,
        citation: None,
        detail: "necessary conditions hold; no sufficient condition applies".into(),
        passed: conditions.iter().map(|c| c.label.to_string()).collect(),
    })
}

pub fn classify(exps: ExponentPair, side: Side) -> Result<Classification> {
    match side {
        Side::Rhs => classify_rhs(exps),
        Side::Lhs => classify_lhs(exps),
    }
}

/// Closed interval `[min, max]` sampled by a region map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn new(min: f64, max: f64) -> Self {
        Range { min, max }
    }

    /// `n` equally spaced points, endpoints included.
    fn points(&self, n: usize) -> Vec<f64> {
        let step = (self.max - self.min) / (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    self.max
                } else {
                    self.min + i as f64 * step
                }
            })
            .collect()
    }
}

/// One cell of a region map. Both classifications are `None` when `r <= s`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionCell {
    pub r: f64,
    pub s: f64,
    pub rhs: Option<Classification>,
    pub lhs: Option<Classification>,
}

impl RegionCell {
    pub fn is_degenerate(&self) -> bool {
        self.rhs.is_none()
    }
}

/// Classifies a `grid_n x grid_n` lattice, `s` outer and `r` inner.
///
/// Cells are evaluated in parallel; the output order is fixed.
pub fn region_map(r_range: Range, s_range: Range, grid_n: usize) -> Result<Vec<RegionCell>> {
    if grid_n < 2 {
        return Err(Error::InvalidGrid(format!("grid size {grid_n} is below 2")));
    }
    for range in [r_range, s_range] {
        if !range.min.is_finite() || !range.max.is_finite() || range.min > range.max {
            return Err(Error::InvalidGrid(format!(
                "range [{}, {}] is not a finite interval",
                range.min, range.max
            )));
        }
    }
    let rs = r_range.points(grid_n);
    let ss = s_range.points(grid_n);
    let cells = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|index| {
            let (r, s) = (rs[index % grid_n], ss[index / grid_n]);
            match ExponentPair::new(r, s) {
                Ok(exps) => RegionCell {
                    r,
                    s,
                    rhs: Some(classify_rhs(exps).expect("ordered pair")),
                    lhs: Some(classify_lhs(exps).expect("ordered pair")),
                },
                Err(_) => RegionCell {
                    r,
                    s,
                    rhs: None,
                    lhs: None,
                },
            }
        })
        .collect();
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(r: f64, s: f64) -> ExponentPair {
        ExponentPair::new(r, s).unwrap()
    }

    fn rhs(r: f64, s: f64) -> Classification {
        classify_rhs(pair(r, s)).unwrap()
    }

    fn lhs(r: f64, s: f64) -> Classification {
        classify_lhs(pair(r, s)).unwrap()
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(rhs(1.0, 0.0).verdict, Verdict::Holds);
        let c = rhs(2.5, 0.4);
        assert_eq!(c.verdict, Verdict::Fails);
        assert!(c.detail.contains("r <= 2"));
        assert_eq!(rhs(2.0, -1.0).verdict, Verdict::Holds);
        assert_eq!(rhs(1.5, -1.2).citation, Some(Citation::Lem1Necessary));
    }

    #[test]
    fn lhs_examples() {
        assert_eq!(lhs(3.0, 0.0).verdict, Verdict::Holds);
        assert_eq!(lhs(3.0, 0.0).citation, Some(Citation::Lem0));
        assert_eq!(lhs(4.0, 0.0).verdict, Verdict::Fails);
        let unknown = lhs(1.5, 1.2);
        assert_eq!(unknown.verdict, Verdict::Unknown);
        assert_eq!(unknown.citation, None);
        assert_eq!(unknown.passed.len(), 4);
        let c = lhs(2.8, -0.6);
        assert_eq!(c.verdict, Verdict::Holds);
        assert_eq!(c.citation, Some(Citation::Thm3B));
    }

    #[test]
    fn lhs_necessary_condition_priority() {
        assert_eq!(lhs(0.9, 0.5).detail, "violates r >= 1");
        let c = lhs(2.5, 1.4);
        assert_eq!(c.verdict, Verdict::Fails);
        assert!(c.detail.contains("r s <= 2"));
        // s < -4 and r + s < 0: the sum condition is cited first
        let c = lhs(3.0, -4.5);
        assert_eq!(c.citation, Some(Citation::Lem1Necessary));
        assert!(c.detail.contains("s >= -4"));
        // s < -4 with r + s in [0, 3]
        assert_eq!(lhs(4.5, -4.2).citation, Some(Citation::RemarkS4));
        // (r - s)/2 = 3.25 exceeds the profile bound 3.203 at r = 3.5
        let c = lhs(3.5, -3.0);
        assert_eq!(c.citation, Some(Citation::Eq2_2));
    }

    #[test]
    fn thm3_first_branch_outside_strip() {
        let c = lhs(1.5, -1.05);
        assert_eq!(c.verdict, Verdict::Holds);
        assert_eq!(c.citation, Some(Citation::Thm3A));
        let c = lhs(1.5, 1.1);
        assert_eq!(c.citation, Some(Citation::Thm3A));
    }

    #[test]
    fn thm3_second_branch_is_strict_at_right_endpoint() {
        let s = -0.6;
        assert_eq!(lhs(3.0 - s, s).verdict, Verdict::Unknown);
    }

    #[test]
    fn region_map_marks_degenerate_cells() {
        let cells = region_map(Range::new(0.0, 2.0), Range::new(0.0, 2.0), 3).unwrap();
        assert_eq!(cells.len(), 9);
        for cell in &cells {
            assert_eq!(cell.is_degenerate(), cell.r <= cell.s);
        }
        let cell = cells.iter().find(|c| c.r == 1.0 && c.s == 0.0).unwrap();
        assert_eq!(cell.rhs.as_ref().unwrap(), &rhs(1.0, 0.0));
        assert!(region_map(Range::new(0.0, 1.0), Range::new(0.0, 1.0), 1).is_err());
    }

    #[test]
    fn citation_tags_serialize() {
        let json = serde_json::to_string(&Citation::RemarkS4).unwrap();
        assert_eq!(json, "\"remark-s>=-4\"");
        assert_eq!(
            serde_json::to_string(&Verdict::Unknown).unwrap(),
            "\"UNKNOWN\""
        );
    }
}
