use std::path::PathBuf;

use crate::learner::TrainingTrace;
use crate::viseme::LanguageId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("{source_name}:{line}: phoneme /{phoneme}/ already mapped for {language}")]
    Conflict {
        source_name: String,
        line: usize,
        language: LanguageId,
        phoneme: String,
    },

    #[error("viseme `{0}` is not produced by either language table")]
    UnknownViseme(String),

    #[error("word `{word}` is not in the {language} lexicon")]
    MissingEntry { word: String, language: LanguageId },

    #[error("phoneme /{phoneme}/ has no {language} viseme mapping")]
    UnmappedPhoneme {
        phoneme: String,
        language: LanguageId,
    },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("incompatible inventories: expected {expected}, found {found}")]
    Incompatible { expected: String, found: String },

    #[error("numeric failure at epoch {epoch}: {message}")]
    NumericFailure { epoch: u32, message: String },

    #[error("no critical period detected within {epochs} phase-1 epochs")]
    NoCriticalPeriod {
        epochs: u32,
        partial: Box<TrainingTrace>,
    },

    #[error("malformed {what}: {message}")]
    Format { what: &'static str, message: String },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(source_name: &str, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            message: message.into(),
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
