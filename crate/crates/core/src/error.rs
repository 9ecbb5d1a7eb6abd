use std::fmt;
use std::io;
use std::path::PathBuf;

use crate::numeric::Network;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// Two operands disagree on shape.
    Dimension {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    InvalidArgument(String),
    InvalidConfig(String),
    /// A forward cache was used against parameters it was not produced from.
    StaleCache(String),
    /// Malformed input file; `line` is 1-based when known.
    Parse {
        path: Option<PathBuf>,
        line: Option<u64>,
        message: String,
    },
    InvalidDataset(String),
    NonFinite(String),
    EmptySet(String),
    /// Training produced a non-finite loss. Carries the parameters as they
    /// were at the start of the offending iteration.
    Divergence {
        epoch: usize,
        iteration: usize,
        quantity: &'static str,
        snapshot: Box<Network>,
    },
    Io {
        path: Option<PathBuf>,
        source: io::Error,
    },
}

impl Error {
    pub fn parse(message: impl Into<String>) -> Self {
        Error::Parse {
            path: None,
            line: None,
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: Some(path.into()),
            source,
        }
    }

    pub(crate) fn with_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            Error::Parse {
                path: None,
                line,
                message,
            } => Error::Parse {
                path: Some(path.into()),
                line,
                message,
            },
            Error::Io { path: None, source } => Error::Io {
                path: Some(path.into()),
                source,
            },
            other => other,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Dimension { op, left, right } => write!(
                f,
                "{op}: dimension mismatch between {}x{} and {}x{}",
                left.0, left.1, right.0, right.1
            ),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::StaleCache(msg) => write!(f, "stale or mismatched cache: {msg}"),
            Error::Parse {
                path,
                line,
                message,
            } => {
                if let Some(p) = path {
                    write!(f, "{}", p.display())?;
                    if let Some(l) = line {
                        write!(f, ":{l}")?;
                    }
                    write!(f, ": ")?;
                } else if let Some(l) = line {
                    write!(f, "line {l}: ")?;
                }
                write!(f, "{message}")
            }
            Error::InvalidDataset(msg) => write!(f, "invalid dataset: {msg}"),
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
            Error::EmptySet(msg) => write!(f, "empty set: {msg}"),
            Error::Divergence {
                epoch,
                iteration,
                quantity,
                ..
            } => write!(
                f,
                "training diverged: non-finite {quantity} at epoch {epoch}, iteration {iteration}"
            ),
            Error::Io { path, source } => match path {
                Some(p) => write!(f, "{}: {source}", p.display()),
                None => write!(f, "{source}"),
            },
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(source: io::Error) -> Self {
        Error::Io { path: None, source }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            path: None,
            line: Some(e.line() as u64),
            message: e.to_string(),
        }
    }
}
