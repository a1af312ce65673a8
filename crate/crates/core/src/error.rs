use thiserror::Error;

/// Errors raised by the scheduling toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid platform: {0}")]
    InvalidPlatform(String),

    #[error("speed {speed} outside [{min}, {max}]")]
    SpeedOutOfRange { speed: f64, min: f64, max: f64 },

    #[error("invalid execution plan: {0}")]
    InvalidPlan(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("closed form not applicable: {0}")]
    NotApplicable(String),

    #[error("cycle detected through task {node}")]
    Cycle { node: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid mapping: {0}")]
    InvalidMapping(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output to {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

pub type Result<R> = std::result::Result<R, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }
}
