//! `report`: merge CSV reports produced by `evaluate` or `denoise` into one
//! file, re-deriving the trailing aggregate block from the combined rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;

use super::{csv_row, read_csv, Common};
use crate::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    /// CSV files to merge; all must share one header.
    #[arg(long, required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
}

pub fn run(args: &ReportArgs) -> CliResult<()> {
    let (_, prov) = args.common.prepare("report")?;
    let mut header: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for path in &args.inputs {
        let (h, r) = read_csv(path)?;
        match &header {
            None => header = Some(h),
            Some(expected) if *expected == h => {}
            Some(_) => {
                return Err(CliError::Usage(format!(
                    "{}: header differs from the first input",
                    path.display()
                )));
            }
        }
        rows.extend(r);
    }
    let header = header.ok_or_else(|| CliError::Usage("no inputs".into()))?;

    let mut out = prov.csv_header();
    let refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    out.push_str(&csv_row(&refs));
    out.push('\n');
    for row in &rows {
        let refs: Vec<&str> = row.iter().map(|s| s.as_str()).collect();
        out.push_str(&csv_row(&refs));
        out.push('\n');
    }

    // Mean of every numeric column, grouped by the leading label columns.
    let numeric: Vec<usize> = (0..header.len())
        .filter(|&i| rows.iter().all(|r| r.get(i).is_some_and(|v| v.parse::<f64>().is_ok())))
        .collect();
    let labels: Vec<usize> = (0..header.len()).filter(|i| !numeric.contains(i)).collect();
    let mut groups: BTreeMap<Vec<String>, (usize, Vec<f64>)> = BTreeMap::new();
    for row in &rows {
        let key: Vec<String> = labels
            .iter()
            .filter(|&&i| header[i] != "image")
            .map(|&i| format!("{}={}", header[i], row[i]))
            .collect();
        let entry = groups.entry(key).or_insert((0, vec![0.0; numeric.len()]));
        entry.0 += 1;
        for (slot, &col) in entry.1.iter_mut().zip(&numeric) {
            *slot += row[col].parse::<f64>().unwrap();
        }
    }
    for (key, (count, sums)) in &groups {
        let means: Vec<String> = sums
            .iter()
            .zip(&numeric)
            .map(|(s, &col)| format!("mean_{}={}", header[col], s / *count as f64))
            .collect();
        let _ = writeln!(out, "# aggregate {} n={count} {}", key.join(" "), means.join(" "));
    }
    fs::write(args.common.out.join("report.csv"), out)?;
    prov.write_sidecar(&args.common.out)?;
    Ok(())
}
