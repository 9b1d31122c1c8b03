use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite: pivot {pivot} non-positive")]
    NotPositiveDefinite { pivot: usize },

    #[error("matrix is not symmetric: |A[{row},{col}] - A[{col},{row}]| = {delta:e} exceeds 1e-10")]
    NotSymmetric { row: usize, col: usize, delta: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("inverse-Wishart prior is improper: degrees of freedom {nu} <= dim - 1 = {}", dim - 1)]
    ImproperPrior { nu: f64, dim: usize },

    #[error("categorical draw requires at least one finite log-weight")]
    AllWeightsZero,

    #[error("k-means requires K <= n, got K = {k} with n = {n}")]
    TooManyClusters { k: usize, n: usize },

    #[error("{path}: {kind}")]
    Io { path: String, kind: String },

    #[error("{path}, row {row}: expected {expected} fields, found {found}")]
    RaggedRow { path: String, row: usize, expected: usize, found: usize },

    #[error("{path}, row {row}, column {col}: cannot parse {value:?} as a number")]
    BadNumber { path: String, row: usize, col: usize, value: String },

    #[error("{path}: file contains no data rows")]
    EmptyFile { path: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("stick representation exceeded {limit} components; slice variables are numerically degenerate")]
    RunawaySticks { limit: usize },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
