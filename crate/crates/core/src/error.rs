use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("non-finite value {value} from {what} at location {location}")]
    NonFinite { what: String, location: f64, value: f64 },

    #[error("atom count {count} exceeds the configured limit of {limit}")]
    Capacity { count: usize, limit: usize },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("parameter `{name}`: {reason}")]
    Parameter { name: String, reason: String },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// A run was aborted. Carries the time of the failure so the CLI can report it.
    #[error("integration aborted at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("residual evaluation: {0}")]
    Residual(String),

    #[error("verification: {0}")]
    Verify(String),

    #[error("config: {0}")]
    Config(String),

    #[error("parse error on line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("linear program: {0}")]
    Lp(String),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical scheme itself, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. } | Error::Integration { .. } | Error::Residual(_) | Error::Lp(_)
        )
    }
}
