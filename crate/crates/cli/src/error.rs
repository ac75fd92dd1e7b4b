use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{0}")]
    Precondition(String),

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 config error, 3 numerical failure, 4 precondition violation
    /// (an unwritable output directory counts as one).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Precondition(_) | CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<giantatom_ssh::Error> for CliError {
    fn from(e: giantatom_ssh::Error) -> Self {
        if e.is_invalid_input() {
            CliError::Config(e.to_string())
        } else if e.is_precondition() {
            CliError::Precondition(e.to_string())
        } else {
            CliError::Numerical(e.to_string())
        }
    }
}
