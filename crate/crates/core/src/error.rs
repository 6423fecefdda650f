use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("header line {line}: {message}")]
    Header { line: usize, message: String },

    #[error("signal data truncated: need {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("signal data has {found} bytes, expected exactly {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("annotation stream at byte {offset}: {message}")]
    Annotation { offset: usize, message: String },

    #[error("beat annotation code {0} has no AAMI class")]
    UnmappedBeatCode(u8),

    #[error("annotation code {0} is not in the MIT code table")]
    UnknownAnnotationCode(u8),

    #[error("record {0} is not part of DS1, DS2 or the paced exclusion list")]
    UnknownRecord(String),

    #[error("record {record}: {message}")]
    Record { record: String, message: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unknown class label `{0}`")]
    UnknownLabel(String),

    #[error("format error in {what}: {message}")]
    Format { what: String, message: String },

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn header(line: usize, message: impl Into<String>) -> Self {
        Error::Header { line, message: message.into() }
    }

    pub(crate) fn annotation(offset: usize, message: impl Into<String>) -> Self {
        Error::Annotation { offset, message: message.into() }
    }

    pub(crate) fn format(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format { what: what.into(), message: message.into() }
    }

    /// True for errors caused by missing or malformed input data, as opposed
    /// to numeric failures or bad parameters.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Header { .. }
                | Error::Truncated { .. }
                | Error::LengthMismatch { .. }
                | Error::Annotation { .. }
                | Error::UnmappedBeatCode(_)
                | Error::UnknownAnnotationCode(_)
                | Error::UnknownRecord(_)
                | Error::Record { .. }
                | Error::MissingData(_)
                | Error::Io { .. }
                | Error::Format { .. }
                | Error::Json(_)
        )
    }

    pub fn is_numeric_error(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}
