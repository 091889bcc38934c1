use std::path::PathBuf;

/// Errors produced by the link model.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("degenerate cavity: |2 - A - D| = {margin:.3e} below {threshold:e}, no unique optic axis")]
    DegenerateCavity { margin: f64, threshold: f64 },

    #[error("sampling error: {reason}; suggested S_N = {suggested_samples}")]
    Sampling {
        reason: String,
        suggested_samples: usize,
    },

    #[error("beam radius undefined for a zero-power field")]
    UndefinedRadius,

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("model out of range: {0}")]
    ModelOutOfRange(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("config: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
