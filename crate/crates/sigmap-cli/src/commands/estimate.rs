//! `estimate`: produce a sigma-map for one image, from a trained
//! checkpoint or the classical local-DCT baseline.

use std::path::PathBuf;

use clap::Args;
use sigmap_core::baseline::{local_dct_estimate, DctBlockSpec};
use sigmap_core::estimator::estimate;

use super::Common;
use crate::checkpoint::load_checkpoint;
use crate::io::load_raster;
use crate::smap::save_sigma_map;
use crate::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Image to analyze.
    #[arg(long)]
    pub input: PathBuf,
    /// Trained estimator checkpoint.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Classical baseline name (local_dct).
    #[arg(long)]
    pub baseline: Option<String>,
    /// Output file name inside --out (default <input stem>.smap).
    #[arg(long)]
    pub name: Option<String>,
}

pub fn run(args: &EstimateArgs) -> CliResult<()> {
    let (config, prov) = args.common.prepare("estimate")?;
    let image = load_raster(&args.input)?;
    let map = match (&args.checkpoint, args.baseline.as_deref()) {
        (Some(path), None) => {
            let est = load_checkpoint(path)?;
            let tile = config.get_usize("estimate.tile", 256)?;
            estimate(&est, &image, tile)?
        }
        (None, Some("local_dct")) => {
            let step = config.get_usize("baseline.step", DctBlockSpec::default().step)?;
            local_dct_estimate(&image, &DctBlockSpec { step })?
        }
        (None, Some(other)) => {
            return Err(CliError::Usage(format!("unknown baseline '{other}'")));
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --checkpoint or --baseline is required".into(),
            ));
        }
    };
    let name = match &args.name {
        Some(n) => n.clone(),
        None => {
            let stem = args
                .input
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| CliError::Usage(format!("bad file name: {}", args.input.display())))?;
            format!("{stem}.smap")
        }
    };
    save_sigma_map(&map, &args.common.out.join(&name))?;
    prov.write_sidecar(&args.common.out)?;
    Ok(())
}
