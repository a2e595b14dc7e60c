//! Error type shared by all core modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    /// Invalid configuration value (bad step count, resolution, interval, ...).
    #[error("config: {0}")]
    Config(String),

    /// Malformed or inconsistent data (shape mismatch, unknown class, bad file).
    #[error("data: {0}")]
    Data(String),

    /// Numerical failure (non-finite loss, underflow, singular transform).
    #[error("numeric: {0}")]
    Numeric(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

impl CoreError {
    pub fn config(msg: impl Into<String>) -> Self {
        CoreError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CoreError::Data(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        CoreError::Numeric(msg.into())
    }
}
