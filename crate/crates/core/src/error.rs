use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the domain of a closed-form bound.
    #[error("domain error: {0}")]
    Domain(String),

    /// `phi_inverse` found no sample count below its search cap.
    #[error("confidence radius never drops to {eps} below t = {cap}")]
    Saturated { eps: f64, cap: u64 },

    /// Invalid engine, instance or run configuration. The first field names the key.
    #[error("invalid `{key}`: {reason}")]
    Config { key: &'static str, reason: String },

    #[error("environment failure: {0}")]
    Environment(String),

    #[error("trial records do not share a checkpoint grid: {0}")]
    MismatchedGrid(String),
}

impl Error {
    pub(crate) fn config(key: &'static str, reason: impl Into<String>) -> Self {
        Error::Config { key, reason: reason.into() }
    }
}
