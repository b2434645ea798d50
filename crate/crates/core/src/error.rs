//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid interval: lower {lower} exceeds upper {upper}")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("unsupported activation {kind} for {op}")]
    UnsupportedActivation { kind: String, op: &'static str },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input set: {0}")]
    InvalidInputSet(String),

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("grid oracle refused: {0}")]
    OracleRefused(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed document: {0}")]
    Malformed(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, VerifyError>;
