use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },

    #[error("invalid configuration: {0}")]
    Validation(String),

    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Core(#[from] quasilocal_core::Error),

    #[error("{0} check(s) failed")]
    Verification(usize),
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 for solver failures, 4 for
    /// failed verification checks.
    pub fn exit_code(&self) -> i32 {
        use quasilocal_core::Error as E;
        match self {
            Self::Parse { .. } | Self::Validation(_) | Self::Io { .. } => 2,
            Self::Core(E::NonConvergence { .. } | E::Factorization(_) | E::NonFinite) => 3,
            Self::Core(_) => 2,
            Self::Verification(_) => 4,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
