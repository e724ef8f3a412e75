//! Batch runner for the `cmv-core` computations and checks.
//!
//! A run reads a JSON [`RunConfig`](config::RunConfig), applies command-line
//! overrides, computes one task on a rayon pool and writes a manifest, CSV
//! data and, for check tasks, a JSON report into the output directory.

pub mod config;
pub mod error;
pub mod exec;
pub mod run;

use std::path::PathBuf;

pub use config::{Overrides, RunConfig, Task};
pub use error::CliError;
pub use exec::RayonExecutor;
pub use run::{execute, write_artifacts, Artifact, RunOutput};

/// Everything a run needs from the command line and environment.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub task: Task,
    pub config: PathBuf,
    pub overrides: Overrides,
    /// Worker count hint; does not affect any output.
    pub threads: Option<usize>,
}

/// Where a finished run wrote its files.
#[derive(Debug, Clone)]
pub struct Finished {
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub output: RunOutput,
}

/// Parses, validates, computes, then writes.
pub fn run(invocation: &Invocation) -> Result<Finished, CliError> {
    let text = std::fs::read_to_string(&invocation.config).map_err(|e| {
        CliError::Config(format!("cannot read {}: {e}", invocation.config.display()))
    })?;
    let resolved = RunConfig::from_json(&text)?.resolve(invocation.task, &invocation.overrides)?;
    let exec = RayonExecutor::new(invocation.threads)?;
    let output = execute(&resolved, &exec)?;
    let files = write_artifacts(&resolved.output_dir, &output.artifacts)?;
    Ok(Finished {
        output_dir: resolved.output_dir,
        files,
        output,
    })
}
