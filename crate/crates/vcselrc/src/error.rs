use std::io;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad configuration or arguments; nothing was computed.
    #[error("invalid configuration: {0}")]
    Validation(String),
    /// The model could not produce a result for a valid configuration.
    #[error("model error: {0}")]
    Model(#[from] vcselrc_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("serialization error: {0}")]
    Serialize(String),
}

impl CliError {
    pub fn validation(e: impl std::fmt::Display) -> Self {
        CliError::Validation(e.to_string())
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: io::Error) -> Self {
        CliError::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            _ => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Model(_) => "model",
            CliError::Io { .. } => "io",
            CliError::Serialize(_) => "serialization",
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        let body = Body { error: self.kind(), message: self.to_string(), exit_code: self.exit_code() };
        serde_json::to_string(&body).unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
