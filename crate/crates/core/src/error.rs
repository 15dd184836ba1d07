use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("SNR is undefined: scaled noise has zero RMS")]
    UndefinedSnr,

    #[error("correlation is undefined: {0} has zero variance")]
    UndefinedCorrelation(&'static str),

    #[error("reference {0} is zero; relative error is undefined")]
    ZeroReference(&'static str),

    /// Data read from disk (or handed in) violates a corpus invariant.
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("corrupt corpus at {path}: {reason}")]
    CorruptCorpus { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed manifest {path}: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("PNG error on {path}: {reason}")]
    Png { path: PathBuf, reason: String },

    /// Wraps an error raised while processing one item of a collection.
    #[error("segment {index}: {source}")]
    AtIndex {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at(index: usize, source: Error) -> Self {
        Error::AtIndex {
            index,
            source: Box::new(source),
        }
    }

    /// True when the error stems from the filesystem rather than the data.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io { .. } => true,
            Error::AtIndex { source, .. } => source.is_io(),
            _ => false,
        }
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
