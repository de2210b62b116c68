//! Crate-wide error type. Variants map onto the CLI exit-code contract:
//! configuration problems, stage failures (resumable), and checkpoint
//! corruption.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error: {0}")]
    Config(String),

    #[error("endpoint unreachable after {attempts} attempts: {detail}")]
    EndpointUnreachable { attempts: u32, detail: String },

    #[error("authentication failed (status {status})")]
    AuthFailed { status: u16 },

    #[error("malformed response: {0}")]
    MalformedResponse(String),

    #[error("mock script error: {0}")]
    MockScript(String),

    #[error("embedding dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("model returned an empty rewrite for question {question_id}")]
    EmptyRewrite { question_id: u64 },

    #[error("inconsistent vote record: {0}")]
    InconsistentRecord(String),

    #[error("few-shot pool too small: need {need} exemplars, have {have}")]
    InsufficientTrainPool { need: usize, have: usize },

    #[error("question {question_id} has no embedding")]
    MissingEmbedding { question_id: u64 },

    #[error("corrupt checkpoint {path} at line {line}: {detail}")]
    CorruptCheckpoint {
        path: PathBuf,
        line: usize,
        detail: String,
    },

    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Exit code for the CLI contract: 1 config, 2 stage failure, 3 corruption.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::CorruptCheckpoint { .. } => 3,
            _ => 2,
        }
    }
}
