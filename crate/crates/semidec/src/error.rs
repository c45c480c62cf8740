use std::path::PathBuf;

use thiserror::Error;

/// Process exit statuses.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const ACCEPTANCE: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERIC: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{origin}: {message}")]
    Config { origin: String, message: String },

    #[error(transparent)]
    Core(#[from] semidec_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl CliError {
    pub fn config(origin: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config {
            origin: origin.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl std::fmt::Display) -> Self {
        CliError::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        use semidec_core::Error as E;
        match self {
            CliError::Usage(_)
            | CliError::Config { .. }
            | CliError::Io { .. }
            | CliError::Format { .. } => exit::USAGE,
            CliError::Core(E::Config(_) | E::InvalidArgument(_) | E::Conditioning { .. }) => {
                exit::USAGE
            }
            CliError::Core(E::StructuralFailure { .. }) => exit::ACCEPTANCE,
            CliError::Core(_) => exit::NUMERIC,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
