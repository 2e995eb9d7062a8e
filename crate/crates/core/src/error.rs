use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    /// A line-oriented input (corpus JSONL, word2vec text, stopword file) is malformed.
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("duplicate article id {0:?}")]
    DuplicateId(String),

    #[error("{what}: unexpected end of data at byte offset {offset}")]
    Truncated { what: &'static str, offset: u64 },

    #[error("{what}: {message} at byte offset {offset}")]
    Malformed {
        what: &'static str,
        offset: u64,
        message: String,
    },

    #[error("embedding header declares {declared} entries, found {found}")]
    EntryCount { declared: usize, found: usize },

    #[error("line {line}: expected {expected} vector components, found {found}")]
    ComponentCount {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("zero-norm vector for term {0:?}")]
    ZeroVector(String),

    #[error("non-finite vector component for term {0:?}")]
    NonFinite(String),

    #[error("cannot build a document-frequency index from an empty corpus")]
    EmptyCorpus,

    #[error("unknown article {0:?}")]
    UnknownArticle(String),

    #[error("unknown category {0:?}")]
    UnknownCategory(String),

    #[error("article {article:?} is not a member of category {category:?}")]
    NotAMember { article: String, category: String },

    #[error("category {0:?} has fewer than two members")]
    SingletonCategory(String),

    #[error("no explainable paragraph in article {0:?}")]
    NoExplainableParagraph(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for this error: 2 input/IO, 3 lookup, 4 configuration.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::UnknownArticle(_)
            | Error::UnknownCategory(_)
            | Error::NotAMember { .. }
            | Error::SingletonCategory(_)
            | Error::NoExplainableParagraph(_) => 3,
            Error::Config(_) => 4,
            _ => 2,
        }
    }
}
