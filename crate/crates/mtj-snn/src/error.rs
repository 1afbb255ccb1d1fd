//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Device geometry does not admit the requested computation.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// The integrator produced a non-finite state.
    #[error("numerical failure at step {step}: {detail}")]
    NumericalFailure { step: usize, detail: String },

    /// Sampled data does not span the range required for a fit.
    #[error("insufficient range: {0}")]
    InsufficientRange(String),

    /// Too few events observed to form a statistic.
    #[error("insufficient statistics: observed {observed} transitions, need {needed}")]
    InsufficientStatistics { observed: usize, needed: usize },

    /// An evaluation never reached the requested accuracy target.
    #[error("accuracy target {target} never reached (best {best})")]
    TargetUnreached { target: f64, best: f64 },

    /// Vector or matrix dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Run-configuration parsing or validation failed.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for the CLI: 2 for usage/config problems,
    /// 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::InvalidGeometry(_)
            | Error::Config(_)
            | Error::DimensionMismatch { .. }
            | Error::InsufficientRange(_) => 2,
            Error::NumericalFailure { .. } => 3,
            _ => 1,
        }
    }
}
