//! Command-line entry point.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::data::Task;
use crate::error::Result;
use crate::model::{Optimizer, TrainConfig};

pub use commands::{GEN_CHECKPOINT, GEN_FINGERPRINTS, GEN_TRIPLES, GEN_TYPES};

/// Universe size assumed when neither a flag nor the fingerprint file says
/// otherwise (PubChem substructure keys).
pub const DEFAULT_UNIVERSE: usize = 881;

#[derive(Debug, Parser)]
#[command(name = "stnn-ddi", version, about = "Substructure tensor model for typed drug-drug interactions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on all positives plus sampled negatives and write a checkpoint.
    Train(TrainArgs),
    /// Cross-validate under one of the C1/C2/C3 settings.
    Evaluate(EvaluateArgs),
    /// Score drug pairs with a trained checkpoint.
    Predict(PredictArgs),
    /// Rank the substructure pairs behind a type or a drug-pair prediction.
    Explain(ExplainArgs),
    /// Generate a planted synthetic dataset.
    GenSynth(GenSynthArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub fingerprints: PathBuf,
    #[arg(long)]
    pub triples: PathBuf,
    #[arg(long)]
    pub types: PathBuf,
    /// Substructure universe size; defaults to the fingerprint file's
    /// `# n=` declaration, else 881.
    #[arg(long)]
    pub n_substructures: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainFlags {
    #[arg(long, default_value_t = 400)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1024)]
    pub batch_size: usize,
    #[arg(long, default_value = "adam", value_parser = parse_optimizer)]
    pub optimizer: Optimizer,
    #[arg(long, default_value_t = 1.0)]
    pub neg_ratio: f64,
    #[arg(long, default_value_t = 1.0)]
    pub init_scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TrainFlags {
    pub fn to_config(&self) -> TrainConfig {
        TrainConfig {
            rank: self.rank,
            learning_rate: self.lr,
            epochs: self.epochs,
            batch_size: self.batch_size,
            init_scale: self.init_scale,
            optimizer: self.optimizer,
            seed: self.seed,
            negative_ratio: self.neg_ratio,
            ..TrainConfig::default()
        }
    }
}

fn parse_optimizer(s: &str) -> std::result::Result<Optimizer, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

fn parse_task(s: &str) -> std::result::Result<Task, String> {
    s.parse().map_err(|e: crate::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainFlags,
    /// Checkpoint to write.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Training report (JSON); printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub train: TrainFlags,
    #[arg(long, value_parser = parse_task)]
    pub task: Task,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    /// Evaluation report (JSON); printed to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub fingerprints: PathBuf,
    #[arg(long)]
    pub types: PathBuf,
    #[arg(long)]
    pub drug_a: String,
    #[arg(long)]
    pub drug_b: String,
    #[arg(long = "type", conflicts_with = "all_types", required_unless_present = "all_types")]
    pub type_id: Option<String>,
    /// Score every type, highest first.
    #[arg(long)]
    pub all_types: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Accepted for symmetry with the other subcommands; prediction is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub types: PathBuf,
    #[arg(long = "type")]
    pub type_id: String,
    /// Required in drug-pair mode.
    #[arg(long)]
    pub fingerprints: Option<PathBuf>,
    #[arg(long, requires = "drug_b")]
    pub drug_a: Option<String>,
    #[arg(long, requires = "drug_a")]
    pub drug_b: Option<String>,
    #[arg(long, default_value_t = 10)]
    pub top_k: usize,
    /// Also list the most negative (suppressive) entries.
    #[arg(long, default_value_t = 0)]
    pub bottom_k: usize,
    /// `index<TAB>description` file naming substructure bits.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GenSynthArgs {
    /// Substructure universe size.
    #[arg(long)]
    pub n: usize,
    /// Number of drugs.
    #[arg(long)]
    pub m: usize,
    /// Number of interaction types.
    #[arg(long)]
    pub f: usize,
    /// Rank of the planted model.
    #[arg(long)]
    pub rank: usize,
    /// Fraction of canonical triples labeled positive.
    #[arg(long)]
    pub density: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// Worker count for fold-level parallelism: `STNN_THREADS`, else the number
/// of logical processors.
pub fn thread_count() -> usize {
    std::env::var("STNN_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(a) => commands::train(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Explain(a) => commands::explain(&a),
        Command::GenSynth(a) => commands::gen_synth(&a),
    }
}

/// Parses `args` and runs the command, returning the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
