//! Crate-wide error type.

use std::fmt;
use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// A configuration value violates a documented invariant. `field` is the
    /// dotted key path so operators can find the offending line.
    Config { field: String, message: String },
    /// Caller passed an argument outside its documented domain.
    Input(String),
    /// An IDX file did not start with the expected magic number.
    IdxBadMagic {
        path: String,
        expected: u32,
        found: u32,
    },
    /// An IDX file ended before its header-declared payload.
    IdxTruncated { path: String },
    /// Image and label files declare different sample counts.
    IdxCountMismatch { images: usize, labels: usize },
    /// A persisted snapshot could not be decoded.
    Snapshot(String),
    Io(io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config { field, message } => write!(f, "config `{field}`: {message}"),
            Error::Input(msg) => write!(f, "invalid input: {msg}"),
            Error::IdxBadMagic {
                path,
                expected,
                found,
            } => write!(
                f,
                "{path}: bad IDX magic number {found:#010x} (expected {expected:#010x})"
            ),
            Error::IdxTruncated { path } => write!(f, "{path}: truncated IDX file"),
            Error::IdxCountMismatch { images, labels } => write!(
                f,
                "IDX count mismatch: {images} images but {labels} labels"
            ),
            Error::Snapshot(msg) => write!(f, "snapshot: {msg}"),
            Error::Io(err) => write!(f, "i/o error: {err}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}

impl Error {
    pub(crate) fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }
}
