// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    ConfigParse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown preset `{0}` (known: {1})")]
    UnknownPreset(String, String),

    #[error("validation failed: {0}")]
    ValidationFailed(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 validation, 3 numerics, 4 I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::ConfigParse { .. } | CliError::UnknownPreset(..) | CliError::ValidationFailed(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Sort a core error into input problems and numerical breakdowns.
    pub(crate) fn from_core(context: &str, e: clsim::Error) -> Self {
        use clsim::Error as E;
        let msg = format!("{context}: {e}");
        match e {
            E::ConvergenceFailure(_)
            | E::DegenerateKernel(_)
            | E::NoSteadyState(_)
            | E::IllConditionedEigenbasis(_)
            | E::NonFinite(_) => CliError::Numerical(msg),
            _ => CliError::ValidationFailed(msg),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
