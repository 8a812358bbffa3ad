use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("field `{field}` out of range: {detail}")]
    InvalidField { field: &'static str, detail: String },

    #[error("{what}: expected length {expected}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("FFT size {fft_size} cannot hold {needed} subcarriers")]
    FftTooSmall { fft_size: usize, needed: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("no PSS peak above threshold (peak-to-median {ratio:.2} < {threshold:.2})")]
    PssNotFound { ratio: f64, threshold: f64 },

    #[error("SSS detection ambiguous (peak-to-median {ratio:.2} < {threshold:.2})")]
    AmbiguousCell { ratio: f64, threshold: f64 },

    #[error("frame too short: need {needed} samples from offset, have {available}")]
    FrameTooShort { needed: usize, available: usize },

    #[error("frame has zero signal power")]
    ZeroPower,

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("missing dataset for {0}")]
    MissingDataset(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("{}: {source}", path.display())]
    File {
        path: std::path::PathBuf,
        source: io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn length(what: &'static str, expected: usize, got: usize) -> Self {
        Error::Length {
            what,
            expected,
            got,
        }
    }

    pub(crate) fn field(field: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidField {
            field,
            detail: detail.into(),
        }
    }
}

/// `fs::read` with the path in the error.
pub(crate) fn read_file(path: &std::path::Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::length(what, expected, got))
    }
}
