use std::path::PathBuf;

use thiserror::Error;

/// Everything that can stop a command before it produces its artifacts.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },
    #[error(transparent)]
    Core(#[from] bfm_core::Error),
    #[error("could not encode JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), msg: msg.into() }
    }

    /// 3 for densities that cannot be transported, 5 when the iteration
    /// blew up, 2 for everything else (bad flags, unreadable files).
    pub fn exit_code(&self) -> u8 {
        use bfm_core::Error as E;
        match self {
            CliError::Core(E::InfeasibleInput(_) | E::AllZeroInput | E::NegativeInput { .. }) => 3,
            CliError::Core(E::NumericalBlowup(_)) => 5,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
