use thiserror::Error;

/// Failures surfaced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("index out of range: {0}")]
    Index(String),
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("eigensolver did not converge after {iterations} iterations (max residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("missing state: {0}")]
    Missing(String),
    #[error("not orthonormal: deviation {0:.3e}")]
    NotOrthonormal(f64),
    #[error("state is not normalized: norm {0}")]
    NotNormalized(f64),
    #[error("division guard: {0}")]
    Degenerate(String),
    #[error("problem too large for {what}: {size} > {limit}")]
    TooLarge { what: &'static str, size: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
