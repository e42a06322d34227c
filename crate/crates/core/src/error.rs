use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the trainer, the sub-solvers and the file readers.
#[derive(Debug, Error)]
pub enum MklError {
    /// The caller supplied arguments that violate a precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// A computation produced a non-finite value or detected a broken
    /// numerical assumption (for example a Gram matrix that is not PSD).
    #[error("numerical error: {0}")]
    Numeric(String),

    /// A text file could not be parsed.
    #[error("{}line {line}: {msg}", display_path(.path))]
    Parse {
        path: Option<PathBuf>,
        line: usize,
        msg: String,
    },

    /// An invariant of an internal algorithm failed. Indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),

    #[error("{}{source}", display_path(.path))]
    Io {
        path: Option<PathBuf>,
        #[source]
        source: io::Error,
    },
}

fn display_path(path: &Option<PathBuf>) -> String {
    match path {
        Some(p) => format!("{}: ", p.display()),
        None => String::new(),
    }
}

impl MklError {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        MklError::Input(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        MklError::Numeric(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        MklError::Parse {
            path: None,
            line,
            msg: msg.into(),
        }
    }

    /// Attaches a file path to parse and I/O errors that do not carry one yet.
    pub fn with_path(self, p: impl Into<PathBuf>) -> Self {
        match self {
            MklError::Parse {
                path: None,
                line,
                msg,
            } => MklError::Parse {
                path: Some(p.into()),
                line,
                msg,
            },
            MklError::Io { path: None, source } => MklError::Io {
                path: Some(p.into()),
                source,
            },
            other => other,
        }
    }
}

impl From<io::Error> for MklError {
    fn from(source: io::Error) -> Self {
        MklError::Io { path: None, source }
    }
}

pub type Result<T, E = MklError> = std::result::Result<T, E>;
