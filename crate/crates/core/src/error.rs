use thiserror::Error;

/// Errors raised while building models, synthesizing gains, or simulating.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A user-supplied quantity failed validation. `field` is a dotted path.
    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("unknown atom label {0}")]
    UnknownAtom(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// A numerical routine failed (non-convergence, singular system, divergence).
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
