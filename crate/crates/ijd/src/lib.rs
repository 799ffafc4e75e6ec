//! Spec files, path export, parallel ensembles, the end-to-end verifier and
//! the `ijd` command line on top of [`ijd_core`].

pub mod cli;
pub mod io;
pub mod parallel;
pub mod report;
pub mod spec;
pub mod verifier;

pub use ijd_core;

#[derive(Debug, thiserror::Error)]
pub enum IjdError {
    #[error("{}", spec_text(*.line, *.column, .message))]
    Spec { message: String, line: usize, column: usize },
    #[error(transparent)]
    Core(#[from] ijd_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed ensemble file: {0}")]
    Format(String),
}

impl IjdError {
    /// A spec error without a source position.
    pub fn spec(message: impl Into<String>) -> Self {
        IjdError::Spec { message: message.into(), line: 0, column: 0 }
    }
}

fn spec_text(line: usize, column: usize, message: &str) -> String {
    if line == 0 {
        format!("spec error: {message}")
    } else {
        format!("spec error at line {line}, column {column}: {message}")
    }
}

pub type Result<T> = std::result::Result<T, IjdError>;
