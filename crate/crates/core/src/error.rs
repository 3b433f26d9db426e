use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid norm exponent p = {0}; need p >= 1")]
    InvalidNorm(f64),

    #[error("unsupported induced norm pair ({0} -> {1})")]
    UnsupportedNormPair(String, String),

    #[error("enumeration over {0} columns exceeds the cap of {1}")]
    EnumerationTooLarge(usize, usize),

    #[error("matrix is rank deficient")]
    RankDeficient,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("problem is infeasible")]
    Infeasible,

    #[error("problem is unbounded")]
    Unbounded,

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("pattern budget exceeded: {0} patterns > {1}")]
    PatternBudgetExceeded(u128, u128),

    #[error("no feasible support of size <= {0}")]
    NoFeasibleSupport(usize),

    #[error("no invertible column subset of the requested size")]
    NoInvertibleSubset,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
