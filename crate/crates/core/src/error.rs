use std::path::PathBuf;

use thiserror::Error;

/// Violations of the partial-matching invariants.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("left index {0} is matched more than once")]
    DuplicateLeft(usize),
    #[error("right index {0} is matched more than once")]
    DuplicateRight(usize),
    #[error("pair ({left}, {right}) is out of range for a {n}x{m} problem")]
    OutOfRange {
        left: usize,
        right: usize,
        n: usize,
        m: usize,
    },
}

/// Errors raised while reading feature or curve files.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{path}: no data rows")]
    Empty { path: PathBuf },
    #[error("{path}:{line}: expected {expected} columns, found {found}")]
    Ragged {
        path: PathBuf,
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: column {column}: cannot parse {value:?} as a number")]
    NonNumeric {
        path: PathBuf,
        line: u64,
        column: usize,
        value: String,
    },
    #[error("{path}:{line}: column {column}: value is not finite")]
    NonFinite {
        path: PathBuf,
        line: u64,
        column: usize,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("feature set is empty")]
    EmptyFeatureSet,
    #[error("feature dimension must be at least 1")]
    ZeroDimension,
    #[error("vector {index} has dimension {found}, expected {expected}")]
    RaggedVectors {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("non-finite coordinate at vector {index}, coordinate {coord}")]
    NonFinite { index: usize, coord: usize },
    #[error("cost matrix entry ({row}, {col}) = {value} is negative or not finite")]
    InvalidCost { row: usize, col: usize, value: f64 },
    #[error("cost matrix must have {expected} entries, got {found}")]
    CostShape { expected: usize, found: usize },
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error("k = {k} is out of range 1..={max}")]
    KOutOfRange { k: usize, max: usize },
    #[error(
        "scaled costs would overflow 64-bit arithmetic (max scaled cost {max_scaled:e} over {pairs} pairs); use a smaller scale"
    )]
    Overflow { max_scaled: f64, pairs: usize },
    #[error("scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("solver invariant violated: {0}")]
    InvariantViolation(String),
    #[error("brute force limited to at most {limit} points per side, got {n}x{m}")]
    BruteForceTooLarge { n: usize, m: usize, limit: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("noise variance must be positive and finite, got {0}")]
    InvalidNoise(f64),
    #[error("step must be at least 1")]
    InvalidStep,
    #[error("total noise variance is zero; signal-to-noise ratio is undefined")]
    ZeroNoise,
    #[error("ground truth: {0}")]
    GroundTruth(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown metric {0:?}")]
    UnknownMetric(String),
    #[error("table has no rows for metric {0:?}")]
    EmptyTable(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
