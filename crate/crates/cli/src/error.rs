use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or schema-invalid input; `field` is a dotted path when known.
    #[error("{}: {field}: {message}", path.display())]
    Input { path: PathBuf, field: String, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: lvrm_core::Error,
    },

    #[error("{failed} of {total} acceptance rows failed")]
    Acceptance { failed: usize, total: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_ACCEPTANCE: i32 = 4;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Usage(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Numerical { .. } => EXIT_NUMERICAL,
            CliError::Acceptance { .. } => EXIT_ACCEPTANCE,
        }
    }

    pub fn numerical(context: impl Into<String>, source: lvrm_core::Error) -> Self {
        CliError::Numerical { context: context.into(), source }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;
