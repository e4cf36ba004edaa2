use thiserror::Error;

use crate::tree::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tuple width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("invalid tree: {0}")]
    InvalidTree(String),

    #[error("vertex {0:?} does not belong to the tree")]
    UnknownVertex(VertexId),

    #[error("vertex {0:?} is a leaf")]
    LeafVertex(VertexId),

    #[error("level {level} out of range (limit {limit})")]
    LevelOutOfRange { level: usize, limit: usize },

    #[error("level {level} has {size} vertices, too many to materialize (limit {limit})")]
    TooLarge { level: usize, size: u64, limit: u64 },

    #[error("missing values: {0}")]
    MissingValues(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible schedule: {0}")]
    InfeasibleSchedule(String),

    #[error("insufficient depth: {0}")]
    InsufficientDepth(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
