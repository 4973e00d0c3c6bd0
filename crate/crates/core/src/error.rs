use std::path::PathBuf;

use thiserror::Error;

/// Which 1D slice of an image an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slice {
    Row(usize),
    Column(usize),
}

impl std::fmt::Display for Slice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Slice::Row(i) => write!(f, "row {i}"),
            Slice::Column(j) => write!(f, "column {j}"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver failed{}: {message}", slice.map(|s| format!(" on {s}")).unwrap_or_default())]
    Eigensolver {
        slice: Option<Slice>,
        message: String,
        /// Largest relative residual observed before giving up, if one could be computed.
        residual: Option<f64>,
    },

    #[error("{path}: file not found")]
    NotFound { path: PathBuf },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("malformed payload: {0}")]
    MalformedPayload(String),

    #[error("not a grayscale image: {0}")]
    NotGrayscale(String),

    #[error("sweep cell h={h}{}: {source}", gamma.map(|g| format!(", gamma={g}")).unwrap_or_default())]
    SweepCell {
        h: f64,
        gamma: Option<f64>,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the numerical kernels, as opposed to bad input data.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Eigensolver { .. } => true,
            Error::SweepCell { source, .. } => source.is_numerical(),
            _ => false,
        }
    }

    pub(crate) fn with_slice(self, at: Slice) -> Self {
        match self {
            Error::Eigensolver {
                message, residual, ..
            } => Error::Eigensolver {
                slice: Some(at),
                message,
                residual,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
