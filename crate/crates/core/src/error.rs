use std::io;

use thiserror::Error;

/// Errors raised anywhere in the scoring pipeline.
#[derive(Debug, Error)]
pub enum VendiError {
    #[error("malformed input: {0}")]
    Format(String),

    #[error("invalid data at row {row}, column {col}: {msg}")]
    DataAt { row: usize, col: usize, msg: String },

    #[error("invalid data: {0}")]
    Data(String),

    #[error("row counts differ: x has {x_rows} rows, t has {t_rows}")]
    Pair { x_rows: usize, t_rows: usize },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("oracle check failed: {0}")]
    OracleFailure(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl VendiError {
    /// Short machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            VendiError::Format(_) => "format",
            VendiError::DataAt { .. } | VendiError::Data(_) => "data",
            VendiError::Pair { .. } => "pair",
            VendiError::Param(_) => "param",
            VendiError::Numerical(_) => "numerical",
            VendiError::OracleFailure(_) => "oracle",
            VendiError::Io(_) => "io",
        }
    }
}

pub type Result<T, E = VendiError> = std::result::Result<T, E>;
