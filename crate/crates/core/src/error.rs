use thiserror::Error;

/// Errors raised by the library. Semi-decision outcomes (a word that never hits
/// the hole, an attractor that has not stabilized yet) are values, not errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("word is not admissible: {0}")]
    Inadmissible(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("product does not contract the cone: {0}")]
    NotContracted(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("no sign change: {0}")]
    NoSignChange(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
