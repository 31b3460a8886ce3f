use thiserror::Error;

/// Errors raised anywhere in the optimization pipeline.
#[derive(Debug, Error)]
pub enum RtoError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl RtoError {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        RtoError::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    /// Process exit code used by the `rto` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            RtoError::Config { .. } | RtoError::InvalidInput(_) => 2,
            RtoError::PreconditionViolation(_) => 2,
            RtoError::Numerical(_) | RtoError::Structural(_) | RtoError::DegenerateVariance(_) => 3,
            RtoError::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, RtoError>;
