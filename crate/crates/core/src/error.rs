use std::path::PathBuf;

/// Errors raised by oracles, kernels and solvers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("format error in {path}: {message} (row {row}, column {column})")]
    Format {
        path: PathBuf,
        row: usize,
        column: usize,
        message: String,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::NumericalFailure(msg.into())
    }

    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NumericalFailure(_) => "numerical-failure",
            Error::Format { .. } => "format-error",
            Error::Io { .. } => "io-error",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
