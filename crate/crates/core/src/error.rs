use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pixel ({x}, {y}) is outside a {width}x{height} volume")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("invalid stream: {0}")]
    InvalidStream(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("rate {rate} at pixel ({x}, {y}) frame {frame} is outside [0, {threshold}]")]
    RateOutOfRange {
        x: usize,
        y: usize,
        frame: usize,
        rate: f64,
        threshold: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("malformed record stream: {0}")]
    MalformedRecord(String),

    #[error("{path}: bad format: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: expected {expected} bytes, found {actual}")]
    Length { path: PathBuf, expected: u64, actual: u64 },

    #[error("{path}: {size} bytes is not a whole number of {width}x{height} frames ({frame_bytes} bytes each){hint}")]
    Geometry {
        path: PathBuf,
        size: u64,
        width: usize,
        height: usize,
        frame_bytes: usize,
        hint: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("{path}: image encoding failed: {reason}")]
    Image { path: PathBuf, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
