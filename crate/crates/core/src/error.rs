use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph parameters: {0}")]
    GraphParams(String),

    #[error("graph invariant violated: {0}")]
    GraphInvariant(String),

    #[error("alpha {0} outside the accepted range [-8, 8] (use `inf` for the majority limit)")]
    AlphaRange(f64),

    #[error("state has {state} nodes but graph has {graph}")]
    LengthMismatch { state: usize, graph: usize },

    #[error("invalid opinion state: {0}")]
    State(String),

    #[error("mean-field domain error: {0}")]
    MeanField(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
