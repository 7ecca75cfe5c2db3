use std::path::PathBuf;

use serde::Serialize;

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] nsco::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("{0} of {1} runs failed")]
    RunsFailed(usize, usize),
}

impl HarnessError {
    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        HarnessError::Csv {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config-error",
            HarnessError::Core(e) => e.kind(),
            HarnessError::Io { .. } => "io-error",
            HarnessError::Csv { .. } => "csv-error",
            HarnessError::RunsFailed(..) => "run-failed",
        }
    }

    /// One-line JSON rendering for the CLI.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.kind(),
            message: self.to_string(),
        })
        .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}
