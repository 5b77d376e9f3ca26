// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error("{0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] mmdseg::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    fn is_config(&self) -> bool {
        match self {
            CliError::Config(_) => true,
            CliError::Core(e) => e.is_config(),
            CliError::Data(_) | CliError::Io { .. } => false,
        }
    }

    /// 2 for configuration problems, 3 for anything wrong with the data.
    pub fn exit_code(&self) -> u8 {
        if self.is_config() {
            2
        } else {
            3
        }
    }

    pub fn diagnostic(&self) -> String {
        #[derive(Serialize)]
        struct Diagnostic<'a> {
            error: &'a str,
            message: String,
        }
        let kind = if self.is_config() { "config" } else { "data" };
        serde_json::to_string(&Diagnostic { error: kind, message: self.to_string() })
            .expect("diagnostics always serialize")
    }
}
