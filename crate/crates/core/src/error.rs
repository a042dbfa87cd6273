use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("set is not representable by a finite semidefinite program: {0}")]
    NotRepresentable(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("budget exhausted: {0}")]
    Budget(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownCatalog(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
