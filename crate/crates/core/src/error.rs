use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a precondition (index out of range, malformed input).
    #[error("usage error: {0}")]
    Usage(String),

    /// Observation is inconsistent with every state in the belief support.
    #[error("inconsistent observation: zero posterior mass after conditioning on query {query}, symbol {symbol}")]
    Inconsistent { query: usize, symbol: u16 },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    /// Instance too large for exhaustive enumeration.
    #[error("instance too large for enumeration: {0}")]
    Size(String),

    #[error("cosine similarity undefined for a zero vector")]
    Similarity,

    #[error("weighted accuracy undefined: total weight is zero")]
    UndefinedAccuracy,

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
