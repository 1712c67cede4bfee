use thiserror::Error;

/// Errors surfaced by frame construction, the solvers and the sensing pipeline.
#[derive(Debug, Error)]
pub enum TeletError {
    #[error("invalid frame dimensions d={d}, N={n}: {reason}")]
    InvalidDimensions { d: usize, n: usize, reason: String },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("column {index} has norm {norm}, expected 1")]
    NotUnitNorm { index: usize, norm: f64 },

    #[error("real frame has a non-zero imaginary part in column {0}")]
    ImaginaryInReal(usize),

    #[error("non-finite entry in column {0}")]
    NonFinite(usize),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, TeletError>;
