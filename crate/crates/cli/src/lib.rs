//! Scenario-driven batch front-end for `cvqkd-core`.
//!
//! A scenario file describes the transmitter, fiber, receiver and key-rate
//! parameters of one study. The `cvqkd` binary validates it completely,
//! runs one subcommand and writes `<name>_results.csv` and
//! `<name>_report.txt`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod scenario;

use std::fs;
use std::path::{Path, PathBuf};

pub use commands::{execute, Command, Output};
pub use error::CliError;
pub use scenario::Scenario;

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    Scenario::parse(&text)
}

/// Writes both result files and returns their paths.
pub fn write_outputs(scenario: &Scenario, out_dir: &Path, output: &Output) -> Result<(PathBuf, PathBuf), CliError> {
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(format!("creating {}", out_dir.display()), e))?;
    let csv = out_dir.join(format!("{}_results.csv", scenario.name));
    let report = out_dir.join(format!("{}_report.txt", scenario.name));
    fs::write(&csv, &output.csv).map_err(|e| CliError::io(format!("writing {}", csv.display()), e))?;
    fs::write(&report, &output.report).map_err(|e| CliError::io(format!("writing {}", report.display()), e))?;
    Ok((csv, report))
}
