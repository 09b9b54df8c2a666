use std::fmt;
use std::path::Path;

use serde::Serialize;

/// Which exit status a failure maps to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    /// Bad input files, flags or configuration. Exit status 1.
    Validation,
    /// Anything else, such as a failed write. Exit status 2.
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Validation,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Internal,
            message: message.into(),
        }
    }

    /// Failure to read an input is the caller's problem.
    pub fn read(path: &Path, err: std::io::Error) -> Self {
        Self::validation(format!("cannot read {}: {err}", path.display()))
    }

    pub fn write(path: &Path, err: impl fmt::Display) -> Self {
        Self::internal(format!("cannot write {}: {err}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Validation => 1,
            ErrorKind::Internal => 2,
        }
    }

    /// The single-line JSON object printed on stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self }).to_string()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Errors from the core library are all about inputs or configuration.
impl From<btdiv_core::Error> for CliError {
    fn from(err: btdiv_core::Error) -> Self {
        Self::validation(err.to_string())
    }
}
