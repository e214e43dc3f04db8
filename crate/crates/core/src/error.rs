use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid UTF-8 in {source_id} at byte offset {offset}")]
    InvalidUtf8 { source_id: String, offset: usize },

    #[error("empty distribution")]
    EmptyDistribution,

    #[error("cannot merge an empty list of tables")]
    EmptyMerge,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid rank window [{r_min}, {r_max}]")]
    InvalidWindow { r_min: usize, r_max: usize },

    #[error("insufficient points: {found} in window, {required} required")]
    InsufficientPoints { found: usize, required: usize },

    #[error("every breakpoint candidate is degenerate")]
    DegenerateBreakpoint,

    #[error("fit does not belong to this distribution: {0}")]
    MismatchedFit(String),

    #[error("size mismatch for corpus {label}: achieved {achieved} tokens, target {target}")]
    SizeMismatch { label: String, achieved: u64, target: u64 },

    #[error("comparison requires normalized distributions ({0} is not)")]
    NotNormalized(String),

    #[error("empty stratum: no records tagged {0}")]
    EmptyStratum(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },

    #[error("duplicate entry ({lemma}, {pos}) on lines {first} and {second}")]
    DuplicateLemma { lemma: String, pos: String, first: usize, second: usize },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse { path: path.to_owned(), line, message: message.into() }
    }
}
