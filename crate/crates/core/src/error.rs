use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range for dimension {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("malformed game tree: {0}")]
    Structure(String),

    #[error("perfect recall violated at infoset {infoset} of player {player}: paths [{path_a}] and [{path_b}]")]
    PerfectRecall {
        player: usize,
        infoset: String,
        path_a: String,
        path_b: String,
    },

    #[error("invalid strategy: {0}")]
    Strategy(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("reconstruction check failed: max deviation {deviation:e} exceeds {tolerance:e}")]
    Reconstruction { deviation: f64, tolerance: f64 },

    #[error("factor column {column} spans blocks {} and {}", blocks.0, blocks.1)]
    Locality { column: usize, blocks: (usize, usize) },

    #[error("iteration cap {cap} exceeded in {stage}")]
    IterationCap { stage: &'static str, cap: u64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
