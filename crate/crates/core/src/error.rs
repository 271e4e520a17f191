use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed XML: {message}")]
    Xml { path: PathBuf, message: String },

    #[error("invalid element path {input:?}: {reason}")]
    InvalidPath { input: String, reason: &'static str },

    #[error("element path {path} does not resolve in document {doc}")]
    UnresolvedPath { doc: String, path: String },

    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,

    #[error("invalid heuristic combination {0:?}")]
    InvalidCombo(String),

    #[error("coherent retrieval element input spans more than one document")]
    MixedDocuments,

    #[error("duplicate element {path} in document {doc}")]
    DuplicatePath { doc: String, path: String },

    #[error("coherent retrieval element input is empty")]
    EmptyMatchList,

    #[error("topic {0} has no keywords")]
    EmptyKeywords(String),

    #[error("invalid topic: {0}")]
    InvalidTopic(String),

    #[error("invalid assessment: {0}")]
    InvalidAssessment(String),

    #[error("topic {0} has no highly relevant elements")]
    NoHighlyRelevant(String),

    #[error("run file line {line}: {message}")]
    RunFormat { line: usize, message: String },

    #[error("index file line {line}: {message}")]
    IndexFormat { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
