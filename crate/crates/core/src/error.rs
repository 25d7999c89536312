use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("image dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("transformation is orientation-reversing (det = {det:e}); only det > 0 is supported")]
    UnsupportedOrientation { det: f64 },

    /// A cover would exceed the configured member cap.
    #[error("cover has {members} members, exceeding the cap of {cap}")]
    Capacity { members: u128, cap: u64 },

    /// An exhaustive search would exceed the configured work cap.
    #[error("exhaustive search needs {work} pixel evaluations, exceeding the work cap of {cap}")]
    WorkCap { work: u128, cap: u64 },

    #[error("malformed image: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
