use emgscrub_core::Error as DataError;
use emgscrub_gan::GanError;
use std::path::PathBuf;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Process exit codes.
pub mod exit {
    pub const ARGS: u8 = 2;
    pub const IO: u8 = 3;
    pub const DATA: u8 = 4;
    pub const NON_FINITE: u8 = 5;
    pub const CHECKPOINT: u8 = 6;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Args(String),

    #[error("config file {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Data(#[from] DataError),

    #[error(transparent)]
    Gan(#[from] GanError),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Args(_) | CliError::Config { .. } => exit::ARGS,
            CliError::Io { .. } => exit::IO,
            CliError::Data(e) => data_code(e),
            CliError::Gan(e) => match e {
                GanError::Config(_) => exit::ARGS,
                GanError::NonFiniteLoss { .. } => exit::NON_FINITE,
                GanError::Incompatible(_) => exit::CHECKPOINT,
                GanError::Io { .. } => exit::IO,
                GanError::Data(e) => data_code(e),
                GanError::Shape(_) | GanError::EmptyDataset => exit::DATA,
            },
        }
    }
}

fn data_code(e: &DataError) -> u8 {
    match e {
        DataError::InvalidArgument(_) => exit::ARGS,
        DataError::Io { .. } => exit::IO,
        DataError::AtIndex { source, .. } => data_code(source),
        _ => exit::DATA,
    }
}
