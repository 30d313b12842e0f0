//! Library side of the benchmark harness: file formats, method execution,
//! report aggregation and kernel timing. The `twoview` binary is a thin
//! argument-parsing shell over these modules.

pub mod aggregate;
pub mod dataset;
pub mod records;
pub mod runner;
pub mod timing;

use thiserror::Error;

/// Harness-level failures, classified for process exit codes
/// (2 = bad flags, 3 = IO/format, 4 = unknown method).
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    UnknownMethod(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Usage(_) => 2,
            HarnessError::Io(_) => 3,
            HarnessError::UnknownMethod(_) => 4,
        }
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
