use std::io;
use std::path::PathBuf;

/// Process exit codes.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const CLAIM_FAILURE: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const RUNTIME: u8 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] zdl_core::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },

    #[error("cache directory {} is in use by another zdl process (delete {}/.lock if it is stale)", .0.display(), .0.display())]
    Locked(PathBuf),

    #[error("{0}")]
    MissingCache(String),

    #[error("thread pool: {0}")]
    Threads(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Usage(_) | Error::MissingCache(_) => exit::USAGE,
            Error::Core(zdl_core::Error::Domain { .. } | zdl_core::Error::Precondition(_)) => {
                exit::USAGE
            }
            _ => exit::RUNTIME,
        }
    }
}
