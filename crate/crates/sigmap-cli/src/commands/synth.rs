//! `synth`: generate ground-truth sigma-maps and noisy images for a corpus.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use sigmap_core::noise::{apply_noise, generate_test_map, scale_map_to_target, NoiseSpec, TestMapModel};
use sigmap_core::{Prng, SigmaMap};

use super::{csv_row, num_label, Common};
use crate::io::{load_raster, save_raster};
use crate::manifest::load_manifest;
use crate::smap::save_sigma_map;
use crate::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: Common,
    /// Corpus manifest: one clean image path per line.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Target sigma_av values.
    #[arg(long = "sigma-av", value_delimiter = ',', required = true)]
    pub sigma_av: Vec<f64>,
    /// Map models: gaussian_peak, linear_ramp, sinusoidal, constant.
    #[arg(long, value_delimiter = ',', default_values_t = [
        "gaussian_peak".to_string(),
        "linear_ramp".to_string(),
        "sinusoidal".to_string(),
    ])]
    pub models: Vec<String>,
    /// Clamp noisy pixels to [0, 255].
    #[arg(long)]
    pub clip: bool,
}

fn build_map(model: &str, width: usize, height: usize, sigma_av: f64) -> CliResult<SigmaMap> {
    if model == "constant" {
        return SigmaMap::filled(width, height, sigma_av).map_err(Into::into);
    }
    let shape = TestMapModel::from_id(model)
        .ok_or_else(|| CliError::Usage(format!("unknown map model '{model}'")))?;
    let unit = generate_test_map(&shape, width, height)?;
    scale_map_to_target(&unit, sigma_av).map_err(Into::into)
}

pub fn run(args: &SynthArgs) -> CliResult<()> {
    if args.models.is_empty() {
        return Err(CliError::Usage("at least one map model is required".into()));
    }
    if args.sigma_av.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(CliError::Usage("sigma-av values must be positive and finite".into()));
    }
    let (config, prov) = args.common.prepare("synth")?;
    let spec = NoiseSpec { clip: args.clip, r: config.get_f64("noise.r", NoiseSpec::default().r)?, ..NoiseSpec::default() };
    let images = load_manifest(&args.manifest)?;

    let mut root = Prng::new(args.common.seed);
    let mut rows = vec![csv_row(&["clean", "noisy", "map", "model", "sigma_av", "clip"])];
    for clean_path in &images {
        let clean = load_raster(clean_path)?;
        if clean.width() < 8 || clean.height() < 8 {
            return Err(CliError::Usage(format!(
                "{}: images must be at least 8x8",
                clean_path.display()
            )));
        }
        let stem = clean_path
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::Usage(format!("bad file name: {}", clean_path.display())))?;
        for model in &args.models {
            for &sigma_av in &args.sigma_av {
                let mut rng = root.split();
                let map = build_map(model, clean.width(), clean.height(), sigma_av)?;
                let noisy = apply_noise(&clean, &map, &spec, &mut rng)?;
                let base = format!("{stem}_{model}_s{}", num_label(sigma_av));
                let noisy_name = format!("{base}.png");
                let map_name = format!("{base}.smap");
                save_raster(&noisy, &args.common.out.join(&noisy_name))?;
                save_sigma_map(&map, &args.common.out.join(&map_name))?;
                rows.push(csv_row(&[
                    &clean_path.display().to_string(),
                    &noisy_name,
                    &map_name,
                    model,
                    &num_label(sigma_av),
                    if args.clip { "1" } else { "0" },
                ]));
            }
        }
    }
    let csv = format!("{}{}\n", prov.csv_header(), rows.join("\n"));
    fs::write(args.common.out.join("synth_manifest.csv"), csv)?;
    prov.write_sidecar(&args.common.out)?;
    Ok(())
}
