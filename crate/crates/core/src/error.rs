//! Error type shared by all simulator modules.

use thiserror::Error;

/// Simulator error.
#[derive(Debug, Error)]
pub enum SimError {
    /// A precondition on an operation argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A configuration value violates a documented invariant.
    #[error("invalid config `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },
}

impl SimError {
    pub fn invalid_argument(msg: impl Into<String>) -> Self {
        SimError::InvalidArgument(msg.into())
    }

    pub fn invalid_config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        SimError::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
