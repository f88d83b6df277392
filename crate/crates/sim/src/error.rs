use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

/// Process exit status for each failure class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const DEGENERATE: i32 = 3;
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Core(#[from] hydroshear_core::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// `line` is 1-based; 0 means the problem is not tied to a line.
    #[error("{}{}: {message}", path.display(), if *line > 0 { format!(":{line}") } else { String::new() })]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Data(String),

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),
}

impl SimError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        SimError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Usage(_) => exit::USAGE,
            SimError::Degenerate(_) | SimError::Core(hydroshear_core::Error::NonFinite(_)) => exit::DEGENERATE,
            _ => exit::DATA,
        }
    }
}
