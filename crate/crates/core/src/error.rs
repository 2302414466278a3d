use thiserror::Error;

use crate::code::InstanceViolation;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected} coordinates, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("dimension mismatch: ({n_a},{k_a}) vs ({n_b},{k_b})")]
    DimensionMismatch {
        n_a: usize,
        k_a: usize,
        n_b: usize,
        k_b: usize,
    },

    #[error("unsupported length n = {0} (must be 1..=32)")]
    UnsupportedLength(usize),

    #[error("matrix has {rows} rows but rank {rank}")]
    RankDeficient { rows: usize, rank: usize },

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("ANF constant coefficient is zero: not the indicator of a linear code")]
    NotLinearIndicator,

    #[error("a code with a single codeword has no minimum distance")]
    TrivialCode,

    #[error("invalid instance: {0}")]
    InvalidInstance(#[from] InstanceViolation),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("population needs at least two individuals")]
    PopulationTooSmall,

    #[error("empty sample")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;
