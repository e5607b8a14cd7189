//! Batch runner for the `stirring` Monte Carlo lab.
//!
//! A run reads a versioned TOML file (documented in the configuration
//! chapter of the guide), writes its CSV and JSON outputs into a directory named by
//! the hash of the resolved configuration, and lists them in
//! `manifest.json`.

pub mod config;
pub mod output;
pub mod run;

use std::path::Path;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Run(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> CliError {
        CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Io { .. } => 3,
            CliError::Run(_) => 4,
        }
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            error: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            field: Option<&'a str>,
            #[serde(skip_serializing_if = "Option::is_none")]
            path: Option<&'a str>,
            message: String,
        }
        let out = match self {
            CliError::Config { field, message } => Out {
                error: "config",
                field: Some(field),
                path: None,
                message: message.clone(),
            },
            CliError::Io { path, message } => Out {
                error: "io",
                field: None,
                path: Some(path),
                message: message.clone(),
            },
            CliError::Run(m) => Out {
                error: "run",
                field: None,
                path: None,
                message: m.clone(),
            },
        };
        serde_json::to_string(&out).expect("serializable")
    }
}

macro_rules! run_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Run(e.to_string())
            }
        }
    )*};
}

run_error!(
    stirring::estimators::EstimatorError,
    stirring::walk::WalkError,
    stirring::clocks::ClockError,
    stirring::diagnostics::DiagnosticsError
);
