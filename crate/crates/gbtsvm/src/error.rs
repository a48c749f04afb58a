use std::path::PathBuf;

use gbtsvm_core::Error as CoreError;

pub type Result<T> = std::result::Result<T, AppError>;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Bad flags, keys or parameter values.
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    /// Unreadable or inconsistent input files.
    #[error("{0}")]
    Data(String),
    /// A failure inside the algorithmic core, tagged with the stage it came from.
    #[error("{context}: {source}")]
    Core { context: &'static str, source: CoreError },
}

impl AppError {
    /// Process exit status: 1 usage, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => 1,
            AppError::Io { .. } | AppError::Data(_) => 2,
            AppError::Core { source, .. } => match source {
                CoreError::InvalidParameter { .. } => 1,
                CoreError::Factorization { .. }
                | CoreError::InvalidHessian(_)
                | CoreError::DegenerateHyperplane { .. }
                | CoreError::NonFinite { .. } => 3,
                _ => 2,
            },
        }
    }

    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> AppError {
        let path = path.into();
        move |source| AppError::Io { path, source }
    }
}

/// Attaches a stage name to core errors.
pub trait CoreContext<T> {
    fn context(self, context: &'static str) -> Result<T>;
}

impl<T> CoreContext<T> for std::result::Result<T, CoreError> {
    fn context(self, context: &'static str) -> Result<T> {
        self.map_err(|source| AppError::Core { context, source })
    }
}
