use std::path::PathBuf;

use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Shape {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("length mismatch in {op}: {lhs} vs {rhs}")]
    Length {
        op: &'static str,
        lhs: usize,
        rhs: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error(transparent)]
    ModelFile(#[from] ModelFileError),

    #[error(transparent)]
    Idx(#[from] IdxError),

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("report: {0}")]
    Report(String),

    #[error("{phase} phase failed: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_phase(self, phase: &'static str) -> Self {
        Error::Phase {
            phase,
            source: Box::new(self),
        }
    }
}

/// Failures reading or writing JSON model files (networks, PCA models, templates).
#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("unsupported format_version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },

    #[error("corrupt length: {0}")]
    CorruptLength(String),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("malformed model file: {0}")]
    Malformed(String),
}

/// Failures parsing the IDX binary container.
#[derive(Debug, Error)]
pub enum IdxError {
    #[error("{path}: bad magic {found:#010x} (expected {expected:#010x})")]
    BadMagic {
        path: PathBuf,
        found: u32,
        expected: u32,
    },

    #[error("{path}: truncated (need {needed} bytes, have {actual})")]
    Truncated {
        path: PathBuf,
        needed: usize,
        actual: usize,
    },

    #[error("image count {images} does not match label count {labels}")]
    CountMismatch { images: usize, labels: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
