use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("infeasible degree combination: n={n}, bit degree {bit_degree}, check degree {check_degree}")]
    InfeasibleDegrees {
        n: usize,
        bit_degree: usize,
        check_degree: usize,
    },

    #[error("parity-check matrix is rank deficient; dependent rows {dependent_rows:?}")]
    RankDeficient { dependent_rows: Vec<usize> },

    #[error("alist parse error at line {line}: {msg}")]
    Alist { line: usize, msg: String },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("embedding error: {0}")]
    Embedding(String),

    #[error("placement infeasible; unplaceable checks {unplaced:?}")]
    Placement { unplaced: Vec<usize> },

    #[error("capacity exceeded: {needed} needed, {available} available")]
    Capacity { needed: usize, available: usize },

    #[error("sample set rejected: {0}")]
    SampleSet(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
