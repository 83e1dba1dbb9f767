use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("invalid attribute layout: {0}")]
    InvalidLayout(String),

    #[error("triangle {0} is degenerate (zero area)")]
    DegenerateTriangle(usize),

    #[error("invalid meshlet limits: {0}")]
    InvalidLimits(String),

    #[error("meshlet references {count} vertices, limit is {limit}")]
    VertexLimit { count: usize, limit: usize },

    #[error("dual graph has {0} edges, brute force supports at most {max}", max = crate::stripify::BRUTE_FORCE_MAX_EDGES)]
    GraphTooLarge(usize),

    #[error("strip violation: {0}")]
    Strip(#[from] crate::stripify::Violation),

    #[error("solution file {path}:{line}: {message}")]
    Solution {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("strip needs {needed} triangles including restarts, limit is {limit}")]
    StripOverflow { needed: usize, limit: usize },

    #[error("malformed stream: {0}")]
    Stream(String),

    #[error("quantization: {0}")]
    Quantize(String),

    #[error("container: {0}")]
    Container(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
