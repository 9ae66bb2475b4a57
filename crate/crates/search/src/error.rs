use std::io;
use std::path::{Path, PathBuf};

use sortbound_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {what}")]
    Format { path: PathBuf, what: String },
    #[error("internal inconsistency: {what}")]
    Inconsistent { what: &'static str },
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl SearchError {
    pub(crate) fn io(path: &Path, source: io::Error) -> Self {
        SearchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn format(path: &Path, what: impl Into<String>) -> Self {
        SearchError::Format {
            path: path.to_path_buf(),
            what: what.into(),
        }
    }
}
