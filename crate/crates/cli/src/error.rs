use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{message}{}", details_suffix(details))]
    Input { message: String, details: Vec<String> },
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

fn details_suffix(d: &[String]) -> String {
    if d.is_empty() {
        String::new()
    } else {
        format!(": {}", d.join("; "))
    }
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError::Input { message: message.into(), details: vec![] }
    }

    pub fn input_at(path: String, message: String) -> Self {
        let path = if path.is_empty() || path == "." { "<root>".into() } else { path };
        CliError::Input { message: format!("at {path}: {message}"), details: vec![] }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Input { .. } => "input",
            CliError::Io(_) => "io",
            CliError::Numerical(_) => "numerical",
        }
    }

    pub fn report(&self) -> ErrorReport {
        let (message, details) = match self {
            CliError::Input { message, details } => (message.clone(), details.clone()),
            other => (other.to_string(), vec![]),
        };
        ErrorReport { status: "error", kind: self.kind(), exit_code: self.exit_code(), message, details }
    }
}

impl From<dpp_core::Error> for CliError {
    fn from(e: dpp_core::Error) -> Self {
        match e {
            dpp_core::Error::InvalidArgument(m) => CliError::input(m),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub status: &'static str,
    pub kind: &'static str,
    pub exit_code: i32,
    pub message: String,
    pub details: Vec<String>,
}
