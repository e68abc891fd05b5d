use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;
use crate::corpus::CorpusError;
use crate::interview::InterviewError;
use crate::landscape::LandscapeError;
use crate::lexicon::LexiconError;
use crate::polarity::PolarityError;
use crate::slam::SlamError;

/// Everything the pipeline can fail with, mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Interview(#[from] InterviewError),
    #[error(transparent)]
    Landscape(#[from] LandscapeError),
    #[error(transparent)]
    Slam(#[from] SlamError),
    #[error(transparent)]
    Polarity(#[from] PolarityError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_IO: i32 = 3;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => EXIT_IO,
            Error::Config(ConfigError::Io { .. }) => EXIT_IO,
            Error::Corpus(CorpusError::Io { .. }) => EXIT_IO,
            Error::Corpus(CorpusError::InFile { source, .. }) if matches!(**source, CorpusError::Io { .. }) => EXIT_IO,
            Error::Slam(_) => EXIT_RUNTIME,
            Error::Polarity(PolarityError::Unmapped(_) | PolarityError::NonFinite(_)) => EXIT_RUNTIME,
            Error::Interview(InterviewError::Answer(_)) => EXIT_RUNTIME,
            _ => EXIT_VALIDATION,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
