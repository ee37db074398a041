use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("truncated payload: expected {expected} bytes, found {found}")]
    TruncatedPayload { expected: usize, found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("out of bounds: {0}")]
    OutOfBounds(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("patch too small for distance m={m}: side {side} < {required}")]
    PatchTooSmall { side: usize, m: i32, required: usize },

    #[error("degenerate patch: no valid pixel pairs for the requested offset")]
    DegeneratePatch,

    #[error("single-class input: training requires both labels")]
    SingleClass,

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
