//! `sgce` command-line interface.

mod commands;
mod config;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sgce::ErrorCategory;

#[derive(Debug, Parser)]
#[command(
    name = "sgce",
    version,
    about = "Spectral mesh encoder: data generation, training, encoding, losses and evaluation"
)]
struct Cli {
    /// Worker threads for parallel sections (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset: topology, deformed samples and a manifest.
    Gen(GenArgs),
    /// Train the mesh autoencoder on a dataset manifest.
    Train(TrainArgs),
    /// Encode a mesh into its latent vector.
    Encode(EncodeArgs),
    /// Evaluate the reconstruction losses for a predicted/ground-truth pair.
    Loss(LossArgs),
    /// Align a prediction to ground truth and report distance statistics.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Base surface: icosphere or grid.
    #[arg(long, default_value = "icosphere")]
    pub kind: String,
    /// Subdivision level of the base surface.
    #[arg(long, default_value_t = 2)]
    pub level: u32,
    #[arg(long, default_value_t = 8)]
    pub count: usize,
    /// Maximum normal displacement in mm.
    #[arg(long, default_value_t = 5.0)]
    pub amplitude: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample file format: obj or ply.
    #[arg(long, default_value = "obj")]
    pub format: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dataset manifest written by `gen`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Output checkpoint path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output loss-history CSV (defaults to the checkpoint path with a .csv extension).
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub mesh: PathBuf,
    /// Write the latent JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LossArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// Region mask: JSON array of per-vertex weights or "uniform".
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Externally computed 2D loss.
    #[arg(long, default_value_t = 0.0)]
    pub l2d: f64,
    /// JSON run configuration supplying loss_weights.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub lambda_2d: Option<f64>,
    #[arg(long)]
    pub lambda_3d: Option<f64>,
    #[arg(long)]
    pub lambda_1: Option<f64>,
    #[arg(long)]
    pub lambda_2: Option<f64>,
    /// Vertex L1 reduction: mean or sum.
    #[arg(long, default_value = "mean")]
    pub reduction: String,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    /// metrical, non_metrical or both.
    #[arg(long, default_value = "both")]
    pub mode: String,
    /// JSON array of [pred_index, gt_index] pairs.
    #[arg(long)]
    pub correspondences: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Write the aligned prediction (single mode only).
    #[arg(long)]
    pub aligned_out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    code: u8,
    msg: String,
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError {
            code: 2,
            msg: msg.into(),
        }
    }

    pub fn io(msg: impl Into<String>) -> Self {
        CliError {
            code: 5,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<sgce::Error> for CliError {
    fn from(e: sgce::Error) -> Self {
        let code = match e.category() {
            ErrorCategory::Usage => 2,
            ErrorCategory::Numeric => 3,
            ErrorCategory::Topology => 4,
            ErrorCategory::Io => 5,
        };
        CliError {
            code,
            msg: e.to_string(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Train(a) => commands::train(&a),
        Command::Encode(a) => commands::encode(&a),
        Command::Loss(a) => commands::loss(&a),
        Command::Eval(a) => commands::eval(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(CliError::usage("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(cli)),
            Err(e) => Err(CliError::usage(format!("cannot start thread pool: {e}"))),
        },
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
