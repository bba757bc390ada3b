//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bugclass",
    version,
    about = "Classify network bug reports by protocol/component category"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a deterministic synthetic labeled corpus.
    Gen(GenArgs),
    /// Show the extracted feature groups of one report, optionally with
    /// per-group information-gain rankings.
    Inspect(InspectArgs),
    /// Train the per-group ensemble and write a model file.
    Train(TrainArgs),
    /// Classify every report in a corpus with a trained model.
    Predict(PredictArgs),
    /// Split a labeled corpus, train every feature group with both event
    /// models plus the ensemble, and report all metrics.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
pub struct GenArgs {
    /// Comma-separated category names.
    #[arg(long, value_delimiter = ',', default_value = "os,bgp,ip,ipv6,aaa,snmp")]
    pub classes: Vec<String>,
    /// Reports generated per category.
    #[arg(long, default_value_t = 100)]
    pub per_class: usize,
    /// Probability that a planted token is class-specific (0 = pure noise,
    /// 1 = perfectly separable).
    #[arg(long, default_value_t = 1.0)]
    pub signal: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Corpus file to write (JSON Lines).
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Report id to inspect.
    #[arg(long)]
    pub id: String,
    /// Also print the top-N features per group ranked by information gain
    /// over the corpus's labeled reports.
    #[arg(long)]
    pub rank: Option<usize>,
}

/// Flags shared by train and evaluate; unset values fall back to the config
/// file, then to built-in defaults.
#[derive(Args)]
pub struct CommonTrainArgs {
    /// Optional JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Laplace smoothing pseudo-count (must be > 0).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Cap every feature group's vocabulary at the top K features by
    /// information gain (per-group values go in the config file).
    #[arg(long)]
    pub select_k: Option<usize>,
    /// Ensemble combination mode: cascade or sum_log_posteriors.
    #[arg(long)]
    pub mode: Option<String>,
    /// Comma-separated cascade priority order over the five feature groups.
    #[arg(long)]
    pub priority: Option<String>,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Model file to write.
    #[arg(short = 'o', long)]
    pub model: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonTrainArgs,
}

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output file for the prediction JSON lines (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonTrainArgs,
    /// Fraction of each class used for training.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// Seed for the stratified split shuffle.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the full evaluation report as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}
