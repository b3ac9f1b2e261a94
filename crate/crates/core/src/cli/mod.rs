//! Library side of the `reserve-spacing` command-line tool.

pub mod commands;
pub mod config;
pub mod format;
pub mod presets;

use std::io::Read;
use std::path::Path;

use thiserror::Error;

pub use config::{ConfigError, RunConfig};
pub use presets::Preset;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("computation failed: {0}")]
    Compute(#[from] crate::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Compute(_) => EXIT_COMPUTE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Matrix,
    Sweep,
    Optimize,
    Simulate,
}

/// Layer a preset, a JSON config (`-` reads standard input) and flag
/// overrides, in that order of increasing precedence.
pub fn load_config(preset: Option<Preset>, path: Option<&Path>, flags: RunConfig) -> Result<RunConfig, CliError> {
    let mut cfg = preset.map(Preset::config).unwrap_or_default();
    if let Some(path) = path {
        let text = if path == Path::new("-") {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            s
        } else {
            std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Io(format!("cannot read config {}: {e}", path.display())))?
        };
        cfg = cfg.layer(RunConfig::from_json(&text)?);
    }
    Ok(cfg.layer(flags))
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<String, CliError> {
    match command {
        Command::Matrix => commands::run_matrix(cfg),
        Command::Sweep => commands::run_sweep(cfg),
        Command::Optimize => commands::run_optimize(cfg),
        Command::Simulate => commands::run_simulate(cfg),
    }
}
