use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("unsupported maxval {0} (only 255 is accepted)")]
    UnsupportedMaxval(u32),

    #[error("unsupported bit depth: {0}")]
    UnsupportedBitDepth(String),

    #[error("truncated image payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("malformed image: {0}")]
    Malformed(String),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },

    #[error("channel mismatch: expected {expected} channel(s), found {found}")]
    ChannelMismatch { expected: u8, found: u8 },

    #[error("image {width}x{height} is smaller than the {window}x{window} analysis window")]
    ImageTooSmall {
        width: usize,
        height: usize,
        window: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("missing frame {index}: {path}")]
    MissingFrame { index: i64, path: PathBuf },

    #[error("unknown method `{0}`")]
    UnknownMethod(String),

    #[error("unknown output format `{0}`")]
    UnknownFormat(String),

    #[error("ragged evaluation matrix: {0}")]
    RaggedMatrix(String),

    #[error("missing metric {metric} for sequence {sequence}")]
    MissingMetric { sequence: String, metric: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn dims(left: impl std::fmt::Display, right: impl std::fmt::Display) -> Self {
        Error::DimensionMismatch {
            left: left.to_string(),
            right: right.to_string(),
        }
    }
}
