use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {message}")]
    InvalidGraph { path: PathBuf, message: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] fgw_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("missing file {0}")]
    MissingFile(PathBuf),
    #[error("{file}:{line}: {message}")]
    MalformedLine { file: String, line: usize, message: String },
    #[error("{file}:{line}: index {value} out of range")]
    IndexOutOfRange { file: String, line: usize, value: i64 },
    #[error("inconsistent counts: {0}")]
    InconsistentCounts(String),
    #[error("feature mode {0} is not available in this dataset")]
    FeatureModeUnavailable(&'static str),
}

/// Process exit codes of the command-line front end.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const INPUT: i32 = 3;
    pub const NUMERICAL: i32 = 4;
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use fgw_core::Error as E;
        match self {
            Error::Usage(_) => exit::USAGE,
            Error::Io { .. } | Error::Json { .. } | Error::InvalidGraph { .. } | Error::Dataset(_) => exit::INPUT,
            Error::Core(e) => match e {
                E::PivotLimit(_) | E::MarginalMismatch { .. } | E::NonFiniteCost { .. } => exit::NUMERICAL,
                E::InvalidAlpha(_)
                | E::InvalidGamma(_)
                | E::InvalidParameter(_)
                | E::UnsupportedExponent(_)
                | E::KTooLarge { .. }
                | E::SpecInvalid(_) => exit::USAGE,
                _ => exit::INPUT,
            },
        }
    }
}
