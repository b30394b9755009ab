use thiserror::Error;

use crate::pbf::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ambient mismatch: {0}")]
    AmbientMismatch(String),

    #[error("finite algebra has an empty carrier")]
    EmptyCarrier,

    #[error("malformed algebra: {0}")]
    Malformed(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("carrier size {size} exceeds the configured limit {limit}")]
    LimitExceeded { size: u128, limit: u128 },

    /// An enclosure is too wide to decide a comparison or a truncation.
    #[error("undecidable at the available precision: {0}")]
    Undecidable(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("premise violated: {0}")]
    Premise(String),

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }
}
