//! The `geopep` command line: argument parsing, run configuration and the
//! subcommand implementations.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod manifest;
pub mod svg;

use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use geopep_core::dataset::DatasetError;
use geopep_core::metrics::MetricsError;
use geopep_core::model::ModelError;
use geopep_core::structio::StructError;
use geopep_core::train::TrainError;

pub use args::{Cli, Command};
pub use config::{RunConfig, Source};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("data: {0}")]
    Data(String),
    #[error("numerical: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<StructError> for CliError {
    fn from(e: StructError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::NonFinite => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Diverged { .. } | TrainError::NonFinite { .. } => CliError::Numerical(e.to_string()),
            TrainError::Config(m) => CliError::Usage(m),
            _ => CliError::Data(e.to_string()),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_digest(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    Ok(sha256_hex(&bytes))
}

pub(crate) fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

pub(crate) fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialize");
    s.push('\n');
    write_text(path, &s)
}

/// Resolves the configuration for `cli` and runs its subcommand.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let name = cli.command.name();
    let file = match &cli.config {
        Some(path) => config::read_config(path, name)?,
        None => Vec::new(),
    };
    let config = RunConfig::resolve(name, &file, &cli.command.flags())?;
    config.log();
    match &cli.command {
        Command::Ingest(_) => commands::ingest::run(&config),
        Command::Train(_) => commands::train::run(&config),
        Command::Predict(_) => commands::predict::run(&config),
        Command::Evaluate(_) => commands::evaluate::run(&config),
        Command::Gradcheck(_) => commands::gradcheck::run(&config),
        Command::Report(_) => commands::report::run(&config),
    }
}
