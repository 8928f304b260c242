use std::path::PathBuf;

use thiserror::Error;

use crate::validate::ValidationReport;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("distribution has no detected emotion")]
    NoDetection,
    #[error("unknown emotion category `{0}`")]
    UnknownEmotion(String),
    #[error("unknown channel `{0}`")]
    UnknownChannel(String),
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: unsupported audio: {message}")]
    Audio { path: PathBuf, message: String },
    #[error("invalid video record:\n{0}")]
    Invalid(ValidationReport),
    #[error("duplicate video id `{0}`")]
    DuplicateId(String),
}

impl IngestError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IngestError::Io { path: path.into(), source }
    }
}

/// Errors from derived-model computations (analytics, projection, prosody).
#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalysisError {
    #[error("video has no audio track")]
    NoAudio,
    #[error("no detected faces in the selected sentences")]
    NoFaces,
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("usage: {0}")]
    Usage(String),
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("unknown video `{0}`")]
    UnknownVideo(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}
