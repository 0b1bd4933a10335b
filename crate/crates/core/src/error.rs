use std::path::PathBuf;

use thiserror::Error;

use crate::field::ValidationReport;

pub type Result<T, E = CodError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CodError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid field: {0}")]
    InvalidField(ValidationReport),

    /// The eigensolver either did not converge or returned eigenpairs whose
    /// residual `||C V - V Λ||_F / ||C||_F` exceeds the acceptance threshold.
    #[error("eigensolver failed: {reason} (residual norm {residual:.3e})")]
    Eigen { reason: String, residual: f64 },

    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CodError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CodError::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CodError::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by the numerics rather than by the caller's input.
    pub fn is_numeric(&self) -> bool {
        matches!(self, CodError::Eigen { .. })
    }
}

/// Diagnostic for malformed CSV input. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}:{line}{}: {message}", file.display(), column.map(|c| format!(":{c}")).unwrap_or_default())]
pub struct ParseError {
    pub file: PathBuf,
    pub line: usize,
    pub column: Option<usize>,
    pub message: String,
}
