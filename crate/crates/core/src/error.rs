use thiserror::Error;

/// Errors produced by the joulebits library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("value {value} outside quantizer range [{lo}, {hi})")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("{what} has {size} elements, exceeding the limit of {limit}")]
    Capacity { what: String, size: u128, limit: u128 },

    #[error("no convergence after {iterations} iterations (bracket [{lower}, {upper}])")]
    IterationLimit {
        iterations: usize,
        lower: f64,
        upper: f64,
    },

    #[error("budget {budget} J is below the minimum expected cost {min_cost} J")]
    Infeasible { budget: f64, min_cost: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("degenerate problem: {0}")]
    Degenerate(String),

    #[error("convention error: {0}")]
    Convention(String),

    #[error("unsupported schema version {found:?}, expected {expected:?}")]
    Version { found: String, expected: String },

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
