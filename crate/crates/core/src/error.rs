//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the extraction, modeling, and training pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is outside its valid range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The input record is too short or too sparse for the requested
    /// operation (e.g. fewer than two R peaks, RR span below 60 s).
    #[error("insufficient signal: {0}")]
    InsufficientSignal(String),

    /// A signal is degenerate for the requested statistic (zero variance).
    #[error("degenerate signal: {0}")]
    DegenerateSignal(String),

    /// The GLM design matrix is rank deficient.
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    /// Argument outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Tensor shape mismatch.
    #[error("shape error: {0}")]
    Shape(String),

    /// Graph node or edge index out of range, or malformed edge list.
    #[error("graph error: {0}")]
    Graph(String),

    /// A model was fed a batch missing a modality its variant requires.
    #[error("input error: {0}")]
    Input(String),

    /// A file failed ingestion validation; the message names the offender.
    #[error("validation error: {0}")]
    Validation(String),

    /// Training diverged (non-finite loss).
    #[error("training diverged: {0}")]
    Divergence(String),

    /// Checkpoint is malformed or belongs to a different model variant.
    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
