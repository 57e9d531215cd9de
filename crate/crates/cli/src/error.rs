use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use thiserror::Error;

/// Exit status for I/O failures (unreadable inputs, unwritable outputs).
pub const EXIT_IO: u8 = 3;
/// Exit status for malformed input or configuration files.
pub const EXIT_PARSE: u8 = 4;
/// Exit status for violated preconditions: bad parameters, unknown tokens,
/// dimension mismatches, degenerate data, zero-shot overlap.
pub const EXIT_PRECONDITION: u8 = 5;
/// Exit status for failures that indicate a bug.
pub const EXIT_INTERNAL: u8 = 6;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}: {source}", path.display())]
    Data { path: PathBuf, source: semsub::Error },

    #[error("config: {0}")]
    Config(String),

    #[error("missing setting `{0}` (config key, SEMSUB_{upper} or --{flag})", upper = .0.to_uppercase(), flag = .0.replace('_', "-"))]
    Missing(&'static str),

    #[error(transparent)]
    Core(#[from] semsub::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Config(_) => EXIT_PARSE,
            CliError::Missing(_) => EXIT_PRECONDITION,
            CliError::Data { source, .. } | CliError::Core(source) => core_code(source),
            CliError::Internal(_) => EXIT_INTERNAL,
        })
    }
}

fn core_code(err: &semsub::Error) -> u8 {
    use semsub::Error::*;
    match err {
        Io(_) => EXIT_IO,
        Parse { .. } | UnknownLabel { .. } => EXIT_PARSE,
        UnknownToken(_) | DimensionMismatch { .. } | InvalidArgument(_) | Degenerate(_)
        | ZeroShotViolation(_) => EXIT_PRECONDITION,
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
