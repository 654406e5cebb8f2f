use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}:{line}: {msg}", path.display())]
    Config { path: PathBuf, line: usize, msg: String },

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Algorithm(#[from] balred::Error),

    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Algorithm(balred::Error::NoConvergence(_)) => 2,
            _ => 1,
        }
    }
}
