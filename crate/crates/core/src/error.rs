use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("time {t} outside the unit interval [0, 1)")]
    TimeOutOfDomain { t: f64 },

    #[error("time {t} outside the acquisition window [0, {duration})")]
    TimeOutOfWindow { t: f64, duration: f64 },

    #[error("length {len} is not a power of two")]
    NotPowerOfTwo { len: usize },

    #[error("spectrum has no coefficient for Paley index {index}")]
    MissingCoefficient { index: u64 },

    #[error("duration mismatch: {left} s vs {right} s")]
    DurationMismatch { left: f64, right: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sensitivity is unbounded for a zero Walsh coefficient")]
    InfiniteSensitivity,

    #[error(
        "adaptive quadrature did not converge on [{lower}, {upper}]: \
         estimate {estimate:e}, error {error_estimate:e} after {intervals} intervals"
    )]
    QuadratureNonConvergence {
        lower: f64,
        upper: f64,
        estimate: f64,
        error_estimate: f64,
        intervals: usize,
    },

    #[error("unknown profile `{0}`")]
    UnknownProfile(String),

    #[error("malformed profile file {path}: {reason}")]
    MalformedProfile { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
