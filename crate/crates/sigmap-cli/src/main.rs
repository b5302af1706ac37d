use clap::{Parser, Subcommand};
use sigmap_cli::commands;

/// Sigma-map estimation toolkit: synthesize non-stationary Gaussian noise,
/// train and run the convolutional estimator, and evaluate against the
/// classical local-DCT baseline.
#[derive(Parser)]
#[command(name = "sigmap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate ground-truth sigma-maps and noisy images for a corpus.
    Synth(commands::synth::SynthArgs),
    /// Train the estimator and write a checkpoint plus loss log.
    Train(commands::train::TrainArgs),
    /// Estimate the sigma-map of one image.
    Estimate(commands::estimate::EstimateArgs),
    /// Score estimators against ground truth, grouped by sigma_av.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Denoise a synthesized set and report PSNR/SSIM.
    Denoise(commands::denoise::DenoiseArgs),
    /// Merge evaluation/denoise CSVs into one report.
    Report(commands::report::ReportArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(a) => commands::synth::run(a),
        Command::Train(a) => commands::train::run(a),
        Command::Estimate(a) => commands::estimate::run(a),
        Command::Evaluate(a) => commands::evaluate::run(a),
        Command::Denoise(a) => commands::denoise::run(a),
        Command::Report(a) => commands::report::run(a),
    };
    if let Err(e) = result {
        eprintln!("sigmap: {e}");
        std::process::exit(e.exit_code());
    }
}
