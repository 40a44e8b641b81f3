use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("vertex {vertex} out of range for n={n}")]
    VertexOutOfRange { vertex: u64, n: usize },

    #[error("layer index {index} out of range ({layers} layers)")]
    LayerOutOfRange { index: usize, layers: usize },

    #[error("vertex-count mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("cannot place {requested} distinct edges on {n} vertices (capacity {capacity})")]
    Capacity {
        requested: u64,
        n: usize,
        capacity: u64,
    },

    #[error("cc node {0} has no stored neighborhood")]
    MissingNeighborhood(u32),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid summary: {0}")]
    Schema(String),

    #[error("graph too large for the brute-force oracle: n={n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
