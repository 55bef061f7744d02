use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result, Status};
use crate::io::InputDigest;

/// Machine-readable record of one command invocation.
///
/// Everything except `wall_time` is a deterministic function of the inputs and flags.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub result: Value,
    pub solver: Value,
    /// Seconds.
    pub wall_time: f64,
}

impl RunReport {
    pub fn new(command: &str, inputs: Vec<InputDigest>, result: Value, solver: Value) -> Self {
        Self { command: command.to_string(), inputs, result, solver, wall_time: 0.0 }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes the report to `out`, or to stdout when `out` is `None`.
    pub fn emit(&self, out: Option<&Path>) -> Result<()> {
        let text = self.to_json();
        match out {
            Some(path) => write_file(path, &text),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
            }
        }
    }
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

/// A finished command: its report, where to write it, and the exit status.
#[derive(Debug)]
pub struct Outcome {
    pub report: RunReport,
    pub out: Option<PathBuf>,
    pub status: Status,
}
