use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unknown name `{name}` at position {pos}")]
    UnknownName { pos: usize, name: String },
    #[error("not of finite type: {0}")]
    NotFiniteType(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("extended exchange matrix is not of full rank")]
    NotFullRank,
    #[error("internal consistency check failed: {0}")]
    Internal(String),
    #[error("invalid seed file: {0}")]
    SeedFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
