use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain on which a function is represented.
    #[error("domain error: {0}")]
    Domain(String),
    /// A value that cannot be bracketed by the range of a monotone map.
    #[error("range error: {0}")]
    Range(String),
    /// Parameter violating a structural constraint (index bounds, admissible ranges).
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Malformed input data.
    #[error("validation error: {0}")]
    Validation(String),
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },
    /// Hypothesis of an iteration lemma fails at the witnessing pair.
    #[error("hypothesis violated at ({first}, {second}): {detail}")]
    Hypothesis {
        first: f64,
        second: f64,
        detail: String,
    },
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
