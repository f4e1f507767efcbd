use thiserror::Error;

/// Errors raised by the journey library.
#[derive(Debug, Error)]
pub enum JourneyError {
    #[error("invalid concept vector: {0}")]
    InvalidVector(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("backend error{}: {message}", .status.map(|s| format!(" (status {s})")).unwrap_or_default())]
    Backend { status: Option<u16>, message: String },
}

pub type Result<T> = std::result::Result<T, JourneyError>;

impl JourneyError {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        JourneyError::InvalidArgument(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        JourneyError::InvalidInput(msg.into())
    }
}
