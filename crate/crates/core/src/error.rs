use thiserror::Error;

/// Errors raised by the numerical routines and the input parsers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sample is empty")]
    EmptySample,

    #[error("sample has {values} values but {weights} weights")]
    LengthMismatch { values: usize, weights: usize },

    #[error("value #{index} is {value}; values must be finite and non-negative")]
    InvalidValue { index: usize, value: f64 },

    #[error("weight #{index} is {value}; weights must be finite and positive")]
    InvalidWeight { index: usize, value: f64 },

    #[error("weights sum to {sum}; they must sum to 1 (within 1e-9)")]
    WeightSum { sum: f64 },

    #[error("exponents must be finite (got r = {r}, s = {s})")]
    NonFiniteExponent { r: f64, s: f64 },

    #[error("exponents must satisfy r > s (got r = {r}, s = {s})")]
    ExponentOrder { r: f64, s: f64 },

    #[error("{name} = {value} is out of range: {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("no interior critical point: {0}")]
    NoCriticalPoint(&'static str),

    #[error("malformed certificate: {0}")]
    MalformedCertificate(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unknown suite {0}")]
    UnknownSuite(String),

    #[error("{message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, expected: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        expected,
    }
}
