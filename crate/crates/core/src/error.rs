use thiserror::Error;

pub type Result<T, E = AdcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum AdcError {
    /// An argument outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration field `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// A sample was offered when the pipeline could not accept it.
    #[error("pipeline not ready: {0}")]
    NotReady(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl AdcError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        AdcError::Domain(msg.into())
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        AdcError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
