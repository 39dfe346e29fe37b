use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit reports.
///
/// Variants group into three families that the CLI maps onto exit codes:
/// usage problems, data-validation problems, and internal (IO) failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: parse error: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("document {doc_id:?}, variable {var_id:?}: {message}")]
    Invariant {
        doc_id: String,
        var_id: String,
        message: String,
    },

    #[error("duplicate doc_id {0:?}")]
    DuplicateDocId(String),

    #[error("template line {line}: {message}")]
    Template { line: usize, message: String },

    #[error("invalid template set: {0}")]
    TemplateSet(String),

    #[error("infeasible template histogram: {0}")]
    InfeasibleHistogram(String),

    #[error("process {process:?} has {available} papers, needs at least {required}")]
    InsufficientPapers {
        process: String,
        available: usize,
        required: usize,
    },

    #[error("unknown process tag {0:?}")]
    UnknownProcess(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid scores: {0}")]
    InvalidScores(String),

    #[error("malformed interval [{start}, {end})")]
    MalformedInterval { start: usize, end: usize },

    #[error("unknown variable {var_id:?} in sentence")]
    UnknownVariable { var_id: String },

    #[error("key mismatch: {0}")]
    KeyMismatch(String),

    #[error("config: {0}")]
    Config(String),

    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invariant(
        doc_id: impl Into<String>,
        var_id: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Invariant {
            doc_id: doc_id.into(),
            var_id: var_id.into(),
            message: message.into(),
        }
    }

    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::Invariant { .. } => "invariant",
            Error::DuplicateDocId(_) => "duplicate_doc_id",
            Error::Template { .. } => "template",
            Error::TemplateSet(_) => "template_set",
            Error::InfeasibleHistogram(_) => "infeasible_histogram",
            Error::InsufficientPapers { .. } => "insufficient_papers",
            Error::UnknownProcess(_) => "unknown_process",
            Error::EmptyInput(_) => "empty_input",
            Error::LengthMismatch(_) => "length_mismatch",
            Error::InvalidScores(_) => "invalid_scores",
            Error::MalformedInterval { .. } => "malformed_interval",
            Error::UnknownVariable { .. } => "unknown_variable",
            Error::KeyMismatch(_) => "key_mismatch",
            Error::Config(_) => "config",
            Error::Usage(_) => "usage",
        }
    }

    /// Process exit code: 1 usage, 2 data validation, 3 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Config(_) => 1,
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}
