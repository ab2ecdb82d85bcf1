use fracvar_core::CoreError;
use thiserror::Error;

/// CLI-level errors, mapped onto the process exit codes: usage problems
/// exit 1, numerical/budget failures exit 2.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AppError {
    pub fn usage(msg: impl Into<String>) -> Self {
        AppError::Usage(msg.into())
    }

    /// Exit code contract: 1 for argument errors, 2 for numerical or
    /// budget failures (IO counts as the latter).
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Numerical(_) | AppError::Io(_) => 2,
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            // bad parameters are argument errors at the CLI boundary
            CoreError::InvalidParameter(_) => AppError::Usage(e.to_string()),
            CoreError::IndexOutOfRange { .. } => AppError::Usage(e.to_string()),
            other => AppError::Numerical(other.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, AppError>;
