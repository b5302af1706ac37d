//! `train`: run the training loop over a corpus and write a checkpoint
//! plus a per-iteration loss log.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::Args;
use sigmap_core::estimator::{train, EstimatorConfig, TrainEvent, TrainSchedule};
use sigmap_core::noise::NoiseSpec;
use sigmap_core::Prng;

use super::Common;
use crate::checkpoint::save_checkpoint;
use crate::config::Config;
use crate::io::load_raster;
use crate::manifest::load_manifest;
use crate::{CliError, CliResult};

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: Common,
    /// Corpus manifest: one training image path per line.
    #[arg(long)]
    pub manifest: PathBuf,
}

pub fn schedule_from_config(config: &Config) -> CliResult<TrainSchedule> {
    let d = TrainSchedule::default();
    Ok(TrainSchedule {
        total_iterations: config.get_usize("train.iterations", d.total_iterations)?,
        lr_stage1: config.get_f64("train.lr1", d.lr_stage1)?,
        lr_stage2: config.get_f64("train.lr2", d.lr_stage2)?,
        stage1_fraction: config.get_f64("train.stage1_fraction", d.stage1_fraction)?,
        batch: config.get_usize("train.batch", d.batch)?,
        patch: config.get_usize("train.patch", d.patch)?,
    })
}

pub fn estimator_config_from(config: &Config, input_channels: usize) -> CliResult<EstimatorConfig> {
    let d = EstimatorConfig::default();
    let channels = match config.get_f64_list("model.channels")? {
        None => d.channels,
        Some(list) if list.len() == 3 => [list[0] as usize, list[1] as usize, list[2] as usize],
        Some(_) => return Err(CliError::Usage("model.channels needs exactly 3 values".into())),
    };
    Ok(EstimatorConfig {
        channels,
        blocks_per_level: config.get_usize("model.blocks", d.blocks_per_level)?,
        input_channels,
    })
}

pub fn run(args: &TrainArgs) -> CliResult<()> {
    let (config, prov) = args.common.prepare("train")?;
    let schedule = schedule_from_config(&config)?;
    let spec = NoiseSpec {
        r: config.get_f64("noise.r", NoiseSpec::default().r)?,
        clip: config.get_bool("noise.clip", false)?,
        ..NoiseSpec::default()
    };
    let paths = load_manifest(&args.manifest)?;
    let corpus = paths.iter().map(|p| load_raster(p)).collect::<CliResult<Vec<_>>>()?;
    let channels = corpus[0].channels();
    if corpus.iter().any(|r| r.channels() != channels) {
        return Err(CliError::Usage("training corpus mixes grayscale and color images".into()));
    }
    let net = estimator_config_from(&config, channels)?;
    let checkpoint_every = config.get_usize("train.checkpoint_every", 0)?;

    let mut rng = Prng::new(args.common.seed);
    let mut log = String::from("iteration,lr,loss\n");
    let ckpt_path = args.common.out.join("checkpoint.sckp");
    let mut ckpt_err: CliResult<()> = Ok(());
    let est = train(&corpus, net, &schedule, &spec, &mut rng, checkpoint_every, &mut |ev| {
        match ev {
            TrainEvent::Loss { iteration, loss, lr } => {
                let _ = writeln!(log, "{iteration},{lr},{loss}");
            }
            TrainEvent::Checkpoint { estimator } => {
                if ckpt_err.is_ok() {
                    ckpt_err = save_checkpoint(estimator, &ckpt_path);
                }
            }
        }
    })?;
    ckpt_err?;
    save_checkpoint(&est, &ckpt_path)?;
    fs::write(args.common.out.join("loss_log.csv"), format!("{}{log}", prov.csv_header()))?;
    prov.write_sidecar(&args.common.out)?;
    Ok(())
}
