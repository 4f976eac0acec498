use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("row references unknown variable {0}")]
    UnknownVariable(usize),
    #[error("malformed model: {0}")]
    Model(String),
    #[error("LP solve failed: {0}")]
    Solve(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("{0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
