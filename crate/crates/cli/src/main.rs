//! `gustosonic` - one binary wiring the whole pipeline into reproducible
//! workflows: synthetic data generation, training, cross-validation,
//! hyperparameter tuning, model comparison, serving, and session replay.
//!
//! Every seeded subcommand is byte-reproducible from its flags, and each run
//! records its effective configuration next to its outputs. Flags beat
//! environment variables (GUSTOSONIC_*), which beat defaults.
//!
//! Exit codes: 0 success, 2 usage errors, 3 data/validation errors,
//! 4 runtime errors (I/O, unreachable endpoints).

mod commands;
mod report;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "gustosonic", version, about = "IMU mouth-activity detection with playful sound feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic IMU dataset as CSV.
    Gen(GenArgs),
    /// Train a random forest on a labeled CSV and save the model document.
    Train(TrainArgs),
    /// Run stratified k-fold cross-validation and write the metrics report.
    Cv(CvArgs),
    /// Randomized hyperparameter search scored by cross-validation.
    Tune(TuneArgs),
    /// Cross-validate the baseline model roster and write the comparison table.
    Baselines(BaselinesArgs),
    /// Serve predictions over HTTP until interrupted.
    Serve(ServeArgs),
    /// Stream a dataset through a running service and log predictions plus
    /// scheduled playback.
    Replay(ReplayArgs),
    /// Write the placeholder clip library as WAV files for audition.
    Clips(ClipsArgs),
}

#[derive(clap::Args, Serialize)]
struct GenArgs {
    /// Output CSV path.
    #[arg(long, env = "GUSTOSONIC_OUT")]
    out: PathBuf,
    #[arg(long, env = "GUSTOSONIC_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    participants: usize,
    /// Minutes recorded per participant per activity.
    #[arg(long, default_value_t = 3.0)]
    minutes: f64,
    /// Sample rate in Hz.
    #[arg(long, default_value_t = 50.0)]
    rate: f64,
    /// Also generate idle segments (off by default: the standard corpus is
    /// the four mouth activities).
    #[arg(long, default_value_t = false)]
    idle: bool,
    /// Scales the sensor noise floor; 0 gives noiseless baselines.
    #[arg(long, default_value_t = 1.0)]
    noise_scale: f64,
}

#[derive(clap::Args, Serialize)]
struct ForestArgs {
    #[arg(long, default_value_t = 100)]
    trees: usize,
    /// Maximum tree depth; omit for unlimited.
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 2)]
    min_split: usize,
    /// Candidate features per split; omit for ceil(sqrt(n_features)).
    #[arg(long)]
    max_features: Option<usize>,
    /// Train each tree on a bootstrap resample.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    bootstrap: bool,
}

#[derive(clap::Args, Serialize)]
struct WindowArgs {
    /// Samples per prediction window (200 = 4 s at 50 Hz).
    #[arg(long, default_value_t = 200)]
    window_len: usize,
    /// Samples between window starts.
    #[arg(long, default_value_t = 200)]
    hop: usize,
}

#[derive(clap::Args, Serialize)]
struct TrainArgs {
    /// Input CSV dataset.
    #[arg(long, env = "GUSTOSONIC_DATA")]
    data: PathBuf,
    /// Output model document path.
    #[arg(long, env = "GUSTOSONIC_MODEL")]
    model: PathBuf,
    #[arg(long, env = "GUSTOSONIC_SEED", default_value_t = 42)]
    seed: u64,
    #[command(flatten)]
    forest: ForestArgs,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(clap::Args, Serialize)]
struct CvArgs {
    #[arg(long, env = "GUSTOSONIC_DATA")]
    data: PathBuf,
    /// Fold count.
    #[arg(long, env = "GUSTOSONIC_K", default_value_t = 10)]
    k: usize,
    #[arg(long, env = "GUSTOSONIC_SEED", default_value_t = 42)]
    seed: u64,
    /// Report CSV path.
    #[arg(long, env = "GUSTOSONIC_OUT")]
    out: PathBuf,
    #[command(flatten)]
    forest: ForestArgs,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(clap::Args, Serialize)]
struct TuneArgs {
    #[arg(long, env = "GUSTOSONIC_DATA")]
    data: PathBuf,
    #[arg(long, env = "GUSTOSONIC_K", default_value_t = 10)]
    k: usize,
    /// Configurations to sample from the default search space.
    #[arg(long, env = "GUSTOSONIC_ITERS", default_value_t = 12)]
    iters: usize,
    #[arg(long, env = "GUSTOSONIC_SEED", default_value_t = 42)]
    seed: u64,
    /// Output directory for best params and the trial log.
    #[arg(long, env = "GUSTOSONIC_OUT")]
    out: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(clap::Args, Serialize)]
struct BaselinesArgs {
    #[arg(long, env = "GUSTOSONIC_DATA")]
    data: PathBuf,
    #[arg(long, env = "GUSTOSONIC_K", default_value_t = 10)]
    k: usize,
    #[arg(long, env = "GUSTOSONIC_SEED", default_value_t = 42)]
    seed: u64,
    /// Comparison table CSV path.
    #[arg(long, env = "GUSTOSONIC_OUT")]
    out: PathBuf,
    #[command(flatten)]
    window: WindowArgs,
}

#[derive(clap::Args, Serialize)]
struct ServeArgs {
    /// Model document to serve.
    #[arg(long, env = "GUSTOSONIC_MODEL")]
    model: PathBuf,
    /// Listen address; port 0 picks an ephemeral port.
    #[arg(long, env = "GUSTOSONIC_LISTEN", default_value = "127.0.0.1:8080")]
    listen: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PaceArg {
    Accelerated,
    RealTime,
}

#[derive(clap::Args, Serialize)]
struct ReplayArgs {
    #[arg(long, env = "GUSTOSONIC_DATA")]
    data: PathBuf,
    #[arg(long, env = "GUSTOSONIC_ENDPOINT", default_value = "http://127.0.0.1:8080")]
    endpoint: String,
    /// Request pacing: the live 4-second cadence or as fast as possible.
    #[arg(long, env = "GUSTOSONIC_PACE", value_enum, default_value_t = PaceArg::Accelerated)]
    pace: PaceArg,
    /// Output directory for the prediction report and playback event log.
    #[arg(long, env = "GUSTOSONIC_OUT")]
    out: PathBuf,
    /// Seed for the clip library and clip selection.
    #[arg(long, env = "GUSTOSONIC_CLIP_SEED", default_value_t = 42)]
    clip_seed: u64,
    /// Samples per request window.
    #[arg(long, default_value_t = 200)]
    window_len: usize,
}

#[derive(clap::Args, Serialize)]
struct ClipsArgs {
    /// Output directory for the 30 WAV files.
    #[arg(long, env = "GUSTOSONIC_OUT")]
    out: PathBuf,
    #[arg(long, env = "GUSTOSONIC_CLIP_SEED", default_value_t = 42)]
    clip_seed: u64,
}

/// Errors mapped to process exit codes.
#[derive(Debug, thiserror::Error)]
enum AppError {
    /// Bad inputs: malformed CSV, invalid specs, unusable parameters.
    #[error("{0}")]
    Data(String),
    /// Environment failures: I/O, sockets, unreachable services.
    #[error("{0}")]
    Runtime(String),
}

impl AppError {
    fn exit_code(&self) -> i32 {
        match self {
            AppError::Data(_) => 3,
            AppError::Runtime(_) => 4,
        }
    }

    fn data(e: impl std::fmt::Display) -> Self {
        AppError::Data(e.to_string())
    }

    fn runtime(e: impl std::fmt::Display) -> Self {
        AppError::Runtime(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Train(args) => commands::train(args),
        Command::Cv(args) => commands::cv(args),
        Command::Tune(args) => commands::tune(args),
        Command::Baselines(args) => commands::baselines(args),
        Command::Serve(args) => commands::serve(args),
        Command::Replay(args) => commands::replay(args),
        Command::Clips(args) => commands::clips(args),
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
