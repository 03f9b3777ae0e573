use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("path loss is singular for a zero-length link")]
    ZeroDistance,

    #[error("attention over an empty encoder sequence")]
    EmptySequence,

    #[error("backward called without a matching forward cache")]
    StaleCache,

    #[error("empty candidate grid")]
    EmptyGrid,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("mismatched scenarios: {0}")]
    Mismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
