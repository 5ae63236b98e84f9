use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: schema error: {message}", path.display())]
    Schema { path: PathBuf, message: String },

    #[error("{}: unsupported format_version {found} (this build reads version {expected})", path.display())]
    Version {
        path: PathBuf,
        found: u64,
        expected: u64,
    },

    #[error("{}: config error: {message}", path.display())]
    Config { path: PathBuf, message: String },

    #[error(transparent)]
    Core(#[from] fibercal_core::Error),
}

/// Process exit status for each error class.
pub mod exit {
    pub const OK: u8 = 0;
    pub const SCHEMA: u8 = 2;
    pub const IDENTIFIABILITY: u8 = 3;
    pub const IO: u8 = 4;
}

impl Error {
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io { .. } => exit::IO,
            Error::Core(e) if e.is_identifiability() => exit::IDENTIFIABILITY,
            _ => exit::SCHEMA,
        }
    }

    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn schema(path: &Path, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }

    pub(crate) fn parse(path: &Path, line: u64, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(path: &Path, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}
