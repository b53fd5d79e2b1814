use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Machine-readable record of one run. Everything except `timing` is a
/// function of the command line.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    /// Parsed flags plus every resolved default the command used.
    pub config: Value,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
    pub threads: usize,
}

/// Collects outputs and warnings while a command runs.
#[derive(Debug, Default)]
pub struct Outcome {
    pub seed: Option<u64>,
    pub config: Value,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn new(seed: Option<u64>, config: Value) -> Self {
        Outcome { seed, config, ..Outcome::default() }
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> CliResult<()> {
        std::fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }
}

pub fn config_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("flag structs serialize")
}

pub fn write_report(path: &PathBuf, report: &RunReport) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}
