use thiserror::Error;

/// Errors produced anywhere in the toolkit.
///
/// The variants are grouped so a front end can map them onto exit codes:
/// capacity problems are distinct from every other kind of failure.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("capacity exceeded: {what} requires {requested}, limit is {limit}{}",
        partial.map(|p| format!(" (partial result: {p})")).unwrap_or_default())]
    Capacity {
        what: String,
        requested: usize,
        limit: usize,
        partial: Option<usize>,
    },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn is_capacity(&self) -> bool {
        matches!(self, Error::Capacity { .. })
    }

    pub(crate) fn capacity(what: impl Into<String>, requested: usize, limit: usize) -> Self {
        Error::Capacity { what: what.into(), requested, limit, partial: None }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
