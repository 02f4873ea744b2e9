//! Error type shared across the crate.

use thiserror::Error;

/// Errors reported by constructors and rate computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("bit index {index} out of range 1..={m}")]
    BitIndexOutOfRange { index: usize, m: usize },

    #[error("bits per symbol m={m} outside supported range 1..=8")]
    BitsOutOfRange { m: usize },

    #[error("dimension mismatch: expected m={expected}, got m={got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("distribution has {got} entries, expected {expected}")]
    WrongLength { expected: usize, got: usize },

    #[error("negative probability {value} at label {label}")]
    NegativeProbability { label: usize, value: f64 },

    #[error("probabilities sum to {sum}, outside tolerance of 1")]
    NotNormalized { sum: f64 },

    #[error("input distribution has zero average power")]
    ZeroPowerDistribution,

    #[error("distribution is not a product of its marginals (max deviation {max_dev})")]
    NotProductDistribution { max_dev: f64 },

    #[error("metric exponent s={s} must be non-negative")]
    NegativeMetricExponent { s: f64 },

    #[error("target rate {target} not reachable: {reason}")]
    TargetRateUnreachable { target: f64, reason: String },

    #[error("codebook size 2^{exponent} exceeds the 2^20 cap")]
    CodebookTooLarge { exponent: u32 },

    #[error("channel row {label} sums to {sum}, expected 1")]
    ChannelRowNotNormalized { label: usize, sum: f64 },

    #[error("negative transition probability {value} at ({label}, {output})")]
    NegativeTransition {
        label: usize,
        output: usize,
        value: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
