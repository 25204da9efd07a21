use std::collections::BTreeMap;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix contains unprogrammed (0) cells where a binary matrix is required")]
    NotBinary,

    #[error("{what} exceeds capacity: limit {limit}, requested {requested}")]
    Capacity {
        what: &'static str,
        limit: usize,
        requested: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("normalization undefined: measured grid is all zero")]
    UndefinedNormalization,

    /// The threshold sweep hit -1 without reaching the target clique size.
    /// Carries the census of the best (largest max clique) step seen.
    #[error("threshold sweep exhausted at -1 without reaching target size {target}")]
    ExhaustedSearch {
        target: usize,
        best_census: BTreeMap<usize, u64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
