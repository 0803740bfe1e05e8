use std::path::PathBuf;

use thiserror::Error;

/// Exit status for a run whose computations finished but an invariant failed.
pub const EXIT_INVARIANT: i32 = 2;
/// Exit status for unreadable or out-of-range input.
pub const EXIT_INPUT: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {field}: {message}")]
    Parse { path: String, line: usize, field: String, message: String },

    #[error("{path}: generator {generator} term {term} (line {line}): {message}")]
    Bounds { path: String, generator: usize, term: usize, line: usize, message: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{path}: malformed result file: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{message}")]
    Usage { message: String },

    #[error("{}: {source}", source.name())]
    Pipeline {
        #[from]
        source: hardyfiber::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Pipeline { source } if is_input_error(source) => EXIT_INPUT,
            CliError::Pipeline { .. } => EXIT_INVARIANT,
            _ => EXIT_INPUT,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        CliError::Format { path: path.into(), message: message.into() }
    }
}

fn is_input_error(e: &hardyfiber::Error) -> bool {
    use hardyfiber::Error::*;
    matches!(e, InvalidLattice(_) | LatticeMismatch(_) | DegreeOverflow { .. } | CoordinateOverflow { .. } | EmptyGenerators)
}

pub type CliResult<T> = Result<T, CliError>;
