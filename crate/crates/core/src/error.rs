//! Error type shared across the crate.

use std::path::PathBuf;

/// Errors produced while loading data, matching aspects or computing statistics.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("phrase is empty after normalization")]
    EmptyPhrase,

    #[error("unknown polarity label: {0:?}")]
    UnknownPolarity(String),

    #[error("theta must lie in [0, 1], got {0}")]
    InvalidTheta(f64),

    #[error("document {doc_id:?}: aspect {aspect:?} appears with conflicting polarities {first} and {second}")]
    ConflictingDuplicateAspect {
        doc_id: String,
        aspect: String,
        first: String,
        second: String,
    },

    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),

    #[error("prediction references unknown document id {0:?}")]
    UnknownDocId(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("no embedding available for phrase {0:?}")]
    MissingEmbedding(String),

    #[error("embedding provider unreachable: {0}")]
    ProviderUnreachable(String),

    #[error("provider {provider:?} returned dimension {got}, expected {expected}")]
    ProviderDimensionChanged {
        provider: String,
        expected: usize,
        got: usize,
    },

    #[error("vector dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("cost matrix contains a non-finite entry at ({row}, {col})")]
    NonFiniteCost { row: usize, col: usize },

    #[error("invalid matrix shape: {0}")]
    InvalidShape(String),

    #[error("match set does not belong to the given phrase sets: {0}")]
    IndexOutOfRange(String),

    #[error("score vectors differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("item {item:?} has {got} ratings, expected {expected}")]
    RaggedRatings {
        item: String,
        expected: usize,
        got: usize,
    },

    #[error("invalid ratings table: {0}")]
    InvalidRatings(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Whether the failure originates from the external embedding provider.
    pub fn is_provider_failure(&self) -> bool {
        matches!(
            self,
            Error::MissingEmbedding(_)
                | Error::ProviderUnreachable(_)
                | Error::ProviderDimensionChanged { .. }
        )
    }

    /// Process exit code for the command line: 3 for provider failures, 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.is_provider_failure() {
            3
        } else {
            2
        }
    }
}
