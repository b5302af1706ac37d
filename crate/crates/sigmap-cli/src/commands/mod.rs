//! One submodule per CLI verb, plus the options shared by all of them.

pub mod denoise;
pub mod estimate;
pub mod evaluate;
pub mod report;
pub mod synth;
pub mod train;

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;

use crate::config::Config;
use crate::provenance::Provenance;
use crate::{CliError, CliResult};

/// Flags every verb accepts.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Master random seed; recorded in every output.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional key=value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Config overrides, dotted key=value; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

impl Common {
    /// Loads the config file (if any), applies overrides, creates the
    /// output directory, and builds the provenance record.
    pub fn prepare(&self, command: &str) -> CliResult<(Config, Provenance)> {
        let mut config = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        config.apply_overrides(&self.set)?;
        fs::create_dir_all(&self.out)
            .map_err(|e| CliError::Io(format!("{}: {e}", self.out.display())))?;
        let prov = Provenance::new(command, self.seed, &config);
        Ok((config, prov))
    }
}

/// Minimal CSV row join/split; fields in our schemas never contain commas.
pub fn csv_row(fields: &[&str]) -> String {
    fields.join(",")
}

pub fn split_csv_row(line: &str) -> Vec<String> {
    line.split(',').map(|s| s.trim().to_string()).collect()
}

/// Reads a CSV written by this tool: returns (header, data rows), skipping
/// `#` comment lines.
pub fn read_csv(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header = lines
        .next()
        .map(split_csv_row)
        .ok_or_else(|| CliError::Io(format!("{}: empty CSV", path.display())))?;
    let rows = lines.map(split_csv_row).collect();
    Ok((header, rows))
}

/// Compact numeric formatting for file names: integers lose the decimal
/// point (10.0 → "10"), everything else keeps it.
pub fn num_label(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}
