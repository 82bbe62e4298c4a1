use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input lies outside the region where the requested quantity is defined.
    #[error("parameter domain: {0}")]
    Domain(String),

    /// An iterative method stopped without meeting its tolerance.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// NaN, overflow or a breakdown inside a numerical kernel.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
