//! `denoise`: run the sliding block-DCT denoiser over a synthesized set
//! using the true maps, previously estimated map files, or a checkpoint.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use sigmap_core::denoise::{denoise, DenoiseSpec};
use sigmap_core::estimator::estimate;
use sigmap_core::metrics::{psnr, ssim};
use sigmap_core::{Raster, SigmaMap};

use super::{csv_row, read_csv, Common};
use crate::checkpoint::load_checkpoint;
use crate::config::Config;
use crate::io::{load_raster, save_raster};
use crate::smap::load_sigma_map;
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapSource {
    /// Ground-truth maps from the manifest.
    True,
    /// Estimated .smap files from --maps, matched by noisy-image stem.
    Files,
    /// Run the checkpoint estimator on each noisy image.
    Checkpoint,
}

impl MapSource {
    fn label(self) -> &'static str {
        match self {
            MapSource::True => "true",
            MapSource::Files => "files",
            MapSource::Checkpoint => "checkpoint",
        }
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[command(flatten)]
    pub common: Common,
    /// Manifest CSV written by `synth`.
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long = "map-source", value_enum)]
    pub map_source: MapSource,
    /// Directory of estimated .smap files (map-source files).
    #[arg(long)]
    pub maps: Option<PathBuf>,
    /// Estimator checkpoint (map-source checkpoint).
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
}

fn pick_map(
    args: &DenoiseArgs,
    config: &Config,
    noisy_path: &Path,
    noisy: &Raster,
    truth: &SigmaMap,
) -> CliResult<SigmaMap> {
    match args.map_source {
        MapSource::True => Ok(truth.clone()),
        MapSource::Files => {
            let dir = args
                .maps
                .as_ref()
                .ok_or_else(|| CliError::Usage("--maps is required with map-source files".into()))?;
            let stem = noisy_path
                .file_stem()
                .and_then(|s| s.to_str())
                .ok_or_else(|| CliError::Usage(format!("bad file name: {}", noisy_path.display())))?;
            load_sigma_map(&dir.join(format!("{stem}.smap")))
        }
        MapSource::Checkpoint => {
            let path = args.checkpoint.as_ref().ok_or_else(|| {
                CliError::Usage("--checkpoint is required with map-source checkpoint".into())
            })?;
            let est = load_checkpoint(path)?;
            let tile = config.get_usize("estimate.tile", 256)?;
            estimate(&est, noisy, tile).map_err(Into::into)
        }
    }
}

pub fn run(args: &DenoiseArgs) -> CliResult<()> {
    let (config, prov) = args.common.prepare("denoise")?;
    let spec = DenoiseSpec {
        step: config.get_usize("denoise.step", DenoiseSpec::default().step)?,
        threshold_factor: config
            .get_f64("denoise.threshold_factor", DenoiseSpec::default().threshold_factor)?,
    };
    let (header, rows) = read_csv(&args.manifest)?;
    let idx = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Io(format!("manifest is missing column '{name}'")))
    };
    let (cli_i, noi_i, map_i) = (idx("clean")?, idx("noisy")?, idx("map")?);
    if rows.is_empty() {
        return Err(CliError::Usage("manifest has no rows".into()));
    }
    let base = args.manifest.parent().unwrap_or(Path::new("."));

    let mut out = prov.csv_header();
    out.push_str(&csv_row(&[
        "map_source", "image", "psnr_noisy", "psnr_denoised", "ssim_noisy", "ssim_denoised",
    ]));
    out.push('\n');
    let mut sums = [0.0f64; 4];
    for row in &rows {
        let clean = load_raster(Path::new(&row[cli_i]))?;
        let noisy_path = base.join(&row[noi_i]);
        let noisy = load_raster(&noisy_path)?;
        let truth = load_sigma_map(&base.join(&row[map_i]))?;
        let map = pick_map(args, &config, &noisy_path, &noisy, &truth)?;
        let restored = denoise(&noisy, &map, &spec)?;
        let name = noisy_path.file_name().and_then(|s| s.to_str()).unwrap_or("?");
        save_raster(&restored, &args.common.out.join(format!("den_{name}")))?;
        let values = [
            psnr(&clean, &noisy)?,
            psnr(&clean, &restored)?,
            ssim(&clean, &noisy)?,
            ssim(&clean, &restored)?,
        ];
        for (s, v) in sums.iter_mut().zip(values) {
            *s += v;
        }
        out.push_str(&csv_row(&[
            args.map_source.label(),
            name,
            &format!("{}", values[0]),
            &format!("{}", values[1]),
            &format!("{}", values[2]),
            &format!("{}", values[3]),
        ]));
        out.push('\n');
    }
    let n = rows.len() as f64;
    let _ = writeln!(
        out,
        "# aggregate map_source={} mean_psnr_noisy={} mean_psnr_denoised={} mean_ssim_noisy={} mean_ssim_denoised={}",
        args.map_source.label(),
        sums[0] / n,
        sums[1] / n,
        sums[2] / n,
        sums[3] / n
    );
    fs::write(args.common.out.join("denoise_report.csv"), out)?;
    prov.write_sidecar(&args.common.out)?;
    Ok(())
}
