use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs, unwritable outputs.
    #[error("{0}")]
    Usage(String),
    /// The computation itself failed. Any artifact has already been written.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    pub(crate) fn parse(path: &Path, e: &serde_json::Error) -> Self {
        let full = e.to_string();
        let position = format!(" at line {} column {}", e.line(), e.column());
        let message = full.strip_suffix(&position).unwrap_or(&full);
        CliError::Usage(format!(
            "{}: parse error at line {}, column {}: {message}",
            path.display(),
            e.line(),
            e.column(),
        ))
    }

    pub(crate) fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Usage(format!("{}: {e}", path.display()))
    }
}

impl From<pfo_core::PfoError> for CliError {
    fn from(e: pfo_core::PfoError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
