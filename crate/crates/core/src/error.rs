use thiserror::Error;

use crate::channel::ChannelViolation;

/// Errors raised by the scheme.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AcesError {
    #[error("invalid arithmetic channel: {}", format_violations(.0))]
    InvalidChannel(Vec<ChannelViolation>),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, found {found} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("noise budget exceeded: {0}")]
    NoiseBudget(String),

    #[error("key generation failed: {0}")]
    KeyGeneration(String),

    #[error("refresh refused: {0}")]
    RefreshRefused(String),

    #[error("invalid message {message}: must be below {modulus}")]
    InvalidMessage { message: u64, modulus: u64 },

    #[error("serialization error: {0}")]
    Serialization(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("toy scheme error: {0}")]
    Toy(String),
}

fn format_violations(v: &[ChannelViolation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, AcesError>;
