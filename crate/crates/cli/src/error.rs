use std::path::PathBuf;

use timecnn_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("cannot write {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    /// 1 for configuration problems, 2 for data and I/O problems, 3 when
    /// the numerics break down.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Core(e) => match e {
                CoreError::Config(_) | CoreError::Shape { .. } => 1,
                CoreError::Data(_) | CoreError::Io { .. } | CoreError::Format(_) => 2,
                CoreError::NonFinite(_) => 3,
            },
            CliError::Output { .. } => 2,
        }
    }

    pub fn output(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Output {
            path: path.into(),
            source,
        }
    }
}
