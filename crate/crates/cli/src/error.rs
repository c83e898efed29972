use stylemt::align::AlignError;
use stylemt::backends::BackendError;
use stylemt::evalkit::EvalError;
use stylemt::pipelines::JobError;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BACKEND: u8 = 3;

/// Printed as one line: `error: <kind>: <message>`.
#[derive(Debug, thiserror::Error)]
#[error("error: {kind}: {message}")]
pub struct CliError {
    pub kind: String,
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn config(kind: &str, message: impl Into<String>) -> Self {
        Self { kind: kind.into(), message: one_line(message.into()), code: EXIT_CONFIG }
    }

    pub fn backend(kind: &str, message: impl Into<String>) -> Self {
        Self { kind: kind.into(), message: one_line(message.into()), code: EXIT_BACKEND }
    }
}

fn one_line(s: String) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl From<JobError> for CliError {
    fn from(e: JobError) -> Self {
        Self::config("config", e.to_string())
    }
}

impl From<AlignError> for CliError {
    fn from(e: AlignError) -> Self {
        Self::config("align", e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        Self::config(e.kind(), e.to_string())
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        match e {
            BackendError::Config(_) | BackendError::InvalidRequest(_) => Self::config(e.kind(), e.to_string()),
            _ => Self::backend(e.kind(), e.to_string()),
        }
    }
}
