//! Weighted power means and variance bounds on their differences.
//!
//! [`means`] evaluates means, variance and the two-sided bound,
//! [`lab`] houses the boundary functionals and polynomial certificates,
//! [`classify`] maps exponent pairs to verdicts, and [`search`] hunts for
//! two-point counterexamples.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod cli;
pub mod error;
pub mod lab;
pub mod means;
pub mod search;
pub mod suites;

pub use classify::{
    classify, classify_lhs, classify_rhs, region_map, Citation, Classification, Range, RegionCell,
    Verdict,
};
pub use error::{Error, Result};
pub use means::{
    cf_check, f_value, mean_gap, power_mean, variance, BoundCheck, ExponentPair, Side,
    WeightedSample, DEFAULT_TOLERANCE,
};
pub use search::{
    brute_force_extremum, search_counterexample, verify_certificate, Certificate, Extremum,
    Provenance, SearchConfig,
};
