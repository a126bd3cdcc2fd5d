use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("field mismatch: {0}")]
    FieldMismatch(String),

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,

    #[error("enumeration budget exceeded: N = {n} exceeds the limit of {budget}")]
    BudgetExceeded { n: usize, budget: usize },

    #[error("parameter is not in the interior of the canonical domain: {0}")]
    NotInterior(String),

    #[error("matrix is numerically singular: {0}")]
    Singular(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}
