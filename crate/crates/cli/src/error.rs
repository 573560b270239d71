use std::path::PathBuf;

/// Exit code for bad flags, unreadable or malformed input.
pub const EXIT_INPUT: u8 = 2;
/// Exit code for numerical failures (exhaustion, near-singular factors).
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit code for failures writing results.
pub const EXIT_OUTPUT: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("cannot write {}: {source}", path.display())]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Output { .. } => EXIT_OUTPUT,
        }
    }

    pub(crate) fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.into(),
            source,
        }
    }
}

impl From<adaptive_cf::Error> for CliError {
    fn from(e: adaptive_cf::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
