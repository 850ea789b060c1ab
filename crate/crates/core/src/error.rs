use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::lang::Language;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("stream error: {0}")]
    Stream(#[from] io::Error),

    #[error("empty corpus: {0}")]
    EmptyCorpus(String),

    #[error("vocabulary is empty after applying min token count {0}")]
    EmptyVocabulary(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported language: {0}")]
    UnsupportedLanguage(String),

    #[error("vector length mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("undefined similarity: zero vector")]
    ZeroVector,

    #[error("duplicate fragment key ({0}, {1})")]
    DuplicateKey(u64, u32),

    #[error("no reference vector for {0}")]
    MissingReference(Language),

    #[error("no indexed vectors for {0}")]
    EmptyPartition(Language),

    #[error("invalid defect score {0}")]
    InvalidScore(i32),

    #[error("no matches to vote on")]
    NoMatches,

    #[error("fingerprint parameter mismatch: ({0}, {1}) vs ({2}, {3})")]
    FingerprintMismatch(usize, usize, usize, usize),

    #[error("input below gram size: {len} < {k}")]
    BelowGramSize { len: usize, k: usize },

    #[error("malformed artifact {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("missing artifact: {0}")]
    MissingArtifact(PathBuf),

    #[error("fragment ({0}, {1}) has no defect score; run `score` first")]
    Unscored(u64, u32),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
