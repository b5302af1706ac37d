//! `evaluate`: score estimators against ground-truth sigma-maps, grouped
//! by sigma_av (relative map error) or, in AWGN mode, by sigma_t
//! (relative STD error of the extracted global sigma).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use sigmap_core::baseline::{global_std_from_map, local_dct_estimate, DctBlockSpec};
use sigmap_core::estimator::estimate;
use sigmap_core::metrics::{check_threshold, relative_map_error, relative_std_error, MapErrorMode};
use sigmap_core::SigmaMap;

use super::{csv_row, read_csv, Common};
use crate::checkpoint::load_checkpoint;
use crate::config::Config;
use crate::io::load_raster;
use crate::smap::load_sigma_map;
use crate::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Manifest CSV written by `synth`.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Evaluate a trained checkpoint (method "cnn").
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Evaluate the classical baseline (method "local_dct").
    #[arg(long)]
    pub baseline: bool,
    /// Evaluate the truth against itself (oracle sanity row).
    #[arg(long)]
    pub truth: bool,
    /// AWGN mode: extract a global sigma per image and score it.
    #[arg(long)]
    pub awgn: bool,
}

struct ManifestRow {
    noisy: PathBuf,
    map: PathBuf,
    model: String,
    sigma_av: String,
    clip: String,
}

fn load_synth_manifest(path: &Path) -> CliResult<Vec<ManifestRow>> {
    let (header, rows) = read_csv(path)?;
    let idx = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Io(format!("{}: missing column '{name}'", path.display())))
    };
    let (ni, mi, moi, si, ci) = (idx("noisy")?, idx("map")?, idx("model")?, idx("sigma_av")?, idx("clip")?);
    let base = path.parent().unwrap_or(Path::new("."));
    rows.into_iter()
        .map(|r| {
            Ok(ManifestRow {
                noisy: base.join(&r[ni]),
                map: base.join(&r[mi]),
                model: r[moi].clone(),
                sigma_av: r[si].clone(),
                clip: r[ci].clone(),
            })
        })
        .collect()
}

enum Method {
    Truth,
    LocalDct { step: usize },
    Cnn { checkpoint: PathBuf },
}

impl Method {
    fn name(&self) -> &'static str {
        match self {
            Method::Truth => "truth",
            Method::LocalDct { .. } => "local_dct",
            Method::Cnn { .. } => "cnn",
        }
    }

    fn estimate_map(&self, row: &ManifestRow, truth: &SigmaMap, config: &Config) -> CliResult<SigmaMap> {
        match self {
            Method::Truth => Ok(truth.clone()),
            Method::LocalDct { step } => {
                let noisy = load_raster(&row.noisy)?;
                local_dct_estimate(&noisy, &DctBlockSpec { step: *step }).map_err(Into::into)
            }
            Method::Cnn { checkpoint } => {
                let est = load_checkpoint(checkpoint)?;
                let noisy = load_raster(&row.noisy)?;
                let tile = config.get_usize("estimate.tile", 256)?;
                estimate(&est, &noisy, tile).map_err(Into::into)
            }
        }
    }
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    let (config, prov) = args.common.prepare("evaluate")?;
    let mut methods = Vec::new();
    if args.truth {
        methods.push(Method::Truth);
    }
    if args.baseline {
        let step = config.get_usize("baseline.step", DctBlockSpec::default().step)?;
        methods.push(Method::LocalDct { step });
    }
    if let Some(p) = &args.checkpoint {
        methods.push(Method::Cnn { checkpoint: p.clone() });
    }
    if methods.is_empty() {
        return Err(CliError::Usage(
            "select at least one of --truth, --baseline, --checkpoint".into(),
        ));
    }
    let rows = load_synth_manifest(&args.manifest)?;
    if rows.is_empty() {
        return Err(CliError::Usage("manifest has no rows".into()));
    }

    let metric = if args.awgn { "eps" } else { "eps_m" };
    let mut out = prov.csv_header();
    out.push_str(&csv_row(&[
        "method", "model", "sigma_av", "clip", "image", "metric", "value", "below_threshold",
    ]));
    out.push('\n');

    // group key (method, sigma_av) → per-image values; AWGN groups also
    // keep sigma_t and the raw global estimates for the Eq.-style pooled ε.
    let mut groups: BTreeMap<(String, String), Vec<f64>> = BTreeMap::new();
    let mut awgn_groups: BTreeMap<(String, String), (f64, Vec<f64>)> = BTreeMap::new();

    for method in &methods {
        for row in &rows {
            let truth = load_sigma_map(&row.map)?;
            let est = method.estimate_map(row, &truth, &config)?;
            let value = if args.awgn {
                let sigma_t = global_std_from_map(&truth);
                let sigma_e = global_std_from_map(&est);
                let entry = awgn_groups
                    .entry((method.name().to_string(), row.sigma_av.clone()))
                    .or_insert((sigma_t, Vec::new()));
                entry.1.push(sigma_e);
                relative_std_error(&[sigma_e], sigma_t)?
            } else {
                let v = relative_map_error(&[est], &[truth], MapErrorMode::MeanOfRatios)?;
                groups
                    .entry((method.name().to_string(), row.sigma_av.clone()))
                    .or_default()
                    .push(v);
                v
            };
            let image = row.noisy.file_name().and_then(|s| s.to_str()).unwrap_or("?").to_string();
            out.push_str(&csv_row(&[
                method.name(),
                &row.model,
                &row.sigma_av,
                &row.clip,
                &image,
                metric,
                &format!("{value}"),
                if check_threshold(value) { "1" } else { "0" },
            ]));
            out.push('\n');
        }
    }

    // trailing aggregate block, one comment line per (method, sigma_av)
    if args.awgn {
        for ((method, sigma_av), (sigma_t, estimates)) in &awgn_groups {
            let eps = relative_std_error(estimates, *sigma_t)?;
            let _ = writeln!(
                out,
                "# aggregate method={method} sigma_av={sigma_av} eps={eps} below_threshold={}",
                u8::from(check_threshold(eps))
            );
        }
    } else {
        for ((method, sigma_av), values) in &groups {
            let eps_m = values.iter().sum::<f64>() / values.len() as f64;
            let _ = writeln!(
                out,
                "# aggregate method={method} sigma_av={sigma_av} eps_m={eps_m} below_threshold={}",
                u8::from(check_threshold(eps_m))
            );
        }
    }

    fs::write(args.common.out.join("evaluation.csv"), out)?;
    prov.write_sidecar(&args.common.out)?;
    Ok(())
}
