//! Command-line surface.
//!
//! Precedence: flags > environment (`CRCEN_*` variables) > built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "crcen",
    version,
    about = "Class-wise reweighted cross-entropy training for imbalanced binary classification",
    long_about = "Trains sigmoid-output MLPs with a class-weighted cross-entropy loss, \
evaluates F1/G-mean, verifies the weight/imbalance/probability relation, reproduces the \
synthetic simulation table, and sweeps the weight parameter to measure the FP-per-FN expense."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on a CSV, evaluate on a stratified holdout, verify the key relation.
    Train(TrainArgs),
    /// Reproduce the simulation summary table for one of the two protocols.
    Simulate(SimulateArgs),
    /// Train one model per alpha on the same split and report expenses.
    Sweep(SweepArgs),
    /// Grid-search once, then evaluate over repeated stratified splits.
    Bench(BenchArgs),
    /// Run the key-equation checks for a saved model on a CSV.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Master seed; every randomized stage derives its own sub-stream from it.
    #[arg(long, env = "CRCEN_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Directory for JSON reports and other outputs.
    #[arg(long, env = "CRCEN_OUT", default_value = "crcen-out")]
    pub out: PathBuf,
    /// Worker threads for concurrent runs (0 = one per core).
    #[arg(long, env = "CRCEN_WORKERS", default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct CsvArgs {
    /// Input CSV: numeric features plus a binary label column.
    #[arg(long)]
    pub csv: PathBuf,
    /// Label column as index or header name (default: last column).
    #[arg(long)]
    pub label_col: Option<String>,
    /// Accept arbitrary two-valued labels; the rarer value becomes class 1.
    #[arg(long)]
    pub map_labels: bool,
    /// Header row handling.
    #[arg(long, value_enum, default_value_t = HeaderArg::Auto)]
    pub header: HeaderArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum HeaderArg {
    /// Treat the first row as a header if any cell is non-numeric.
    Auto,
    Yes,
    No,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    /// Train fraction of the stratified split.
    #[arg(long, default_value_t = 0.75)]
    pub ratio: f64,
    /// Skip feature standardization (fit on train, applied everywhere).
    #[arg(long)]
    pub no_standardize: bool,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    /// Minority-class weight in (0,1).
    #[arg(long, conflicts_with = "alpha")]
    pub lambda: Option<f64>,
    /// Weight via alpha*N0/(alpha*N0+N1) using training-split class counts
    /// (default: alpha = 1, inverse class frequency).
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainKnobs {
    /// L2 coefficient on weights (biases are never regularized).
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    /// Hidden layer widths, comma separated; 0 means no hidden layer
    /// (logistic regression).
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub hidden: Vec<usize>,
    /// Hidden activation: sigmoid, relu, or tanh.
    #[arg(long, default_value = "sigmoid")]
    pub activation: String,
    /// Learning rate, applied to the gradient divided by the batch size.
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    /// Epoch cap.
    #[arg(long, default_value_t = 20_000)]
    pub epochs: usize,
    /// Convergence tolerance on |dL/db_out|/N.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Decision threshold; predict 1 iff p > threshold.
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Mini-batch size (omit for full-batch descent).
    #[arg(long)]
    pub batch: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[command(flatten)]
    pub knobs: TrainKnobs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Protocol: 1 (one-dimensional, logistic) or 2 (three-dimensional MLP).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub sim: u8,
    /// Independent repetitions (each resamples train and test data).
    #[arg(long, default_value_t = 100)]
    pub runs: usize,
    /// Read the minority spread parameter of protocol 2 as a variance
    /// instead of a standard deviation.
    #[arg(long)]
    pub sigma_as_variance: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub knobs: TrainKnobs,
    /// Alpha values defining the weight schedule, in sweep order.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,1.5,2")]
    pub alphas: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    #[command(flatten)]
    pub knobs: TrainKnobs,
    /// Stratified train/test repetitions; hyperparameters are selected on
    /// the first and reused.
    #[arg(long, default_value_t = 4)]
    pub repeats: usize,
    /// Folds for the selection cross-validation.
    #[arg(long, default_value_t = 4)]
    pub cv_k: usize,
    /// Hidden-width grid (0 = no hidden layer).
    #[arg(long, value_delimiter = ',', default_value = "10")]
    pub grid_hidden: Vec<usize>,
    /// L2 coefficient grid.
    #[arg(long, value_delimiter = ',', default_value = "0,0.001")]
    pub grid_beta: Vec<f64>,
    /// Selection metric: gmean or f1.
    #[arg(long, default_value = "gmean")]
    pub metric: String,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Saved model JSON (as written by `train`).
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub csv: CsvArgs,
    #[command(flatten)]
    pub weight: WeightArgs,
    /// Majority training count for the generalized right-hand side
    /// (default: the CSV's own count).
    #[arg(long)]
    pub n0: Option<usize>,
    /// Minority training count for the generalized right-hand side.
    #[arg(long)]
    pub n1: Option<usize>,
}
