use std::io;
use std::path::PathBuf;

use semetl_core::operation::Operation;
use semetl_core::plan::PlanError;
use semetl_core::Diagnostic;

#[derive(Debug, thiserror::Error)]
pub enum EtlError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{0}")]
    Plan(PlanError),
    #[error("step {step} ({op}): {message}")]
    Step {
        step: usize,
        op: Operation,
        message: String,
    },
    #[error("{0}")]
    Config(String),
    #[error("{} diagnostic(s)", .0.len())]
    Diagnostics(Vec<Diagnostic>),
}

impl EtlError {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        EtlError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        EtlError::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Process exit code: 2 for I/O and parse failures, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            EtlError::Io { .. } | EtlError::Parse { .. } => 2,
            _ => 1,
        }
    }
}

impl From<PlanError> for EtlError {
    fn from(e: PlanError) -> Self {
        EtlError::Plan(e)
    }
}

pub type Result<T, E = EtlError> = std::result::Result<T, E>;
