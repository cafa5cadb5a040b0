use thiserror::Error;

use crate::parser::SyntaxError;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),

    #[error("malformed summation: `{subterm}` is not a summation")]
    MalformedSum { subterm: String },

    #[error("malformed binder `{binder}`: reserved names cannot be bound")]
    MalformedBinder { binder: String },

    #[error("process contains replication and has no finite LTS: `{process}`")]
    NotFinite { process: String },

    #[error("fresh-name pool exhausted (pool size {pool_size})")]
    UniverseTooSmall { pool_size: usize },

    #[error("transition graph contains a cycle")]
    CyclicLts,

    #[error("exploration was truncated before a deadlocked state was found")]
    Inconclusive,

    #[error("state-pair relation has {pairs} pairs, above the bound of {bound}")]
    TooLarge { pairs: usize, bound: usize },

    #[error("stutter-free normalisation incomplete: {reason}")]
    NormalizationIncomplete {
        reason: String,
        witness: Option<(String, String)>,
    },

    #[error("search budget exhausted after {explored} candidate pairs")]
    Aborted { explored: u64 },

    #[error("unknown demo `{0}`")]
    UnknownDemo(String),
}

pub type Result<T> = std::result::Result<T, Error>;
