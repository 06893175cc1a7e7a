use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("empty set where a non-empty one is required: {0}")]
    EmptySet(&'static str),

    #[error("{operation} requires an overcomplete frame (Delta < 2 pi), got {regime} with Delta = {delta}")]
    Regime {
        operation: &'static str,
        regime: String,
        delta: f64,
    },

    #[error("Laguerre truncation M = {trunc} leaves tail {tail:e} for site at |gamma| = {radius}")]
    Truncation { trunc: usize, tail: f64, radius: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("monomial is not normal ordered (creations must precede annihilations)")]
    NotNormalOrdered,

    #[error("operator is not a projection: |P^2 - P| = {0:e}")]
    NotProjection(f64),

    #[error("windows are not nested: {0}")]
    NotNested(String),

    #[error("site {0:?} is not part of the window")]
    UnknownSite([i64; 3]),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
