use std::path::PathBuf;

/// Failures of the command layer, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Exit code 2.
    #[error("invalid config: {0}")]
    Config(String),

    /// Exit code 1.
    #[error("solver error in run {run}: {source}")]
    Solver {
        run: String,
        #[source]
        source: cgm_core::Error,
    },

    /// Exit code 1.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Exit code 1.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Classifies a core error raised while running `run`. Errors raised
    /// before the first iteration (bad arguments, bad configs) are config
    /// errors; anything raised inside the loop is a solver error.
    pub fn from_core(run: &str, err: cgm_core::Error) -> Self {
        match err {
            cgm_core::Error::InvalidArgument(msg) | cgm_core::Error::InvalidConfig(msg) => {
                CliError::Config(format!("run {run}: {msg}"))
            }
            err => CliError::Solver {
                run: run.to_string(),
                source: err,
            },
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Failed(format!("csv: {err}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
