use thiserror::Error;

/// Errors surfaced by the allocation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("infeasible deployment spec: {0}")]
    InfeasibleSpec(String),

    #[error("RU {ru} is not connected to site {site}")]
    NotConnected { ru: usize, site: usize },

    #[error("RU {ru} is not assigned to site {site}")]
    NotAssigned { ru: usize, site: usize },

    #[error("instance too large for exhaustive search: {rus} RUs / {sites} sites (caps {max_rus} / {max_sites})")]
    InstanceTooLarge {
        rus: usize,
        sites: usize,
        max_rus: usize,
        max_sites: usize,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
