use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Multi-penalty regularization with Nyström subsampling.
///
/// Value-taking options can also come from `--config FILE` (lines of
/// `key = value`, keys named after the long flags). Flags take precedence.
#[derive(Debug, Parser)]
#[command(name = "mpreg", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model; several landmark sizes give an LFS aggregate.
    Fit(FitArgs),
    /// Predict with a saved model.
    Predict(PredictArgs),
    /// Score a saved model on labeled data.
    Evaluate(EvaluateArgs),
    /// Cross-validated accuracy of full, Nyström and aggregated estimators.
    Cv(CvArgs),
    /// Grid search over lambda0 and lambda1 by k-fold cross-validation.
    Grid(GridArgs),
    /// Combine saved Nyström models by the linear functional strategy.
    Aggregate(AggregateArgs),
    /// Effective dimension, leverage and Nyström gap over a gamma grid.
    Diagnose(DiagnoseArgs),
    /// Empirical convergence rate on a planted target.
    Rate(RateArgs),
    /// Generate a synthetic regression data set.
    GenSynthetic(SyntheticArgs),
    /// Encode, filter and scale an NSL-KDD file.
    PreprocessNslkdd(NslKddArgs),
    /// Multi-view fit with a combination operator.
    Multiview(MultiviewArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Optional key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long)]
    pub seed: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV data file.
    #[arg(long)]
    pub data: Option<String>,
    /// Number of leading rows with labels; the rest are unlabeled.
    #[arg(long)]
    pub labeled: Option<String>,
    /// Skip the first line.
    #[arg(long)]
    pub header: bool,
    /// Label column: `last`, `none` or a zero-based index.
    #[arg(long)]
    pub label_col: Option<String>,
    /// Read integer class ids and expand them to ±1 one-hot rows.
    #[arg(long)]
    pub one_hot: bool,
}

#[derive(Debug, Args)]
pub struct RegArgs {
    /// `gaussian:<gamma>`, `chi2:<gamma>`, `linear` or `precomputed:<csv>`.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub lambda0: Option<String>,
    /// Weight of the graph Laplacian penalty.
    #[arg(long)]
    pub lambda1: Option<String>,
    /// Bandwidth `b` of the weights `exp(−‖x − x'‖²/(4b))`.
    #[arg(long)]
    pub graph_b: Option<String>,
    /// Keep only the k nearest neighbours of each point in the graph.
    #[arg(long)]
    pub knn: Option<String>,
    /// Drop the graph penalty.
    #[arg(long)]
    pub no_graph: bool,
    /// `times_m` or `none`.
    #[arg(long)]
    pub scaling: Option<String>,
}

#[derive(Debug, Args)]
pub struct LandmarkArgs {
    /// Landmark sizes, comma separated.
    #[arg(long)]
    pub landmarks: Option<String>,
    /// `uniform` (seeded draw) or `first`.
    #[arg(long)]
    pub landmark_mode: Option<String>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub reg: RegArgs,
    #[command(flatten)]
    pub landmarks: LandmarkArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: Option<String>,
    /// Query CSV; every column is a feature unless --label-col is given.
    #[arg(long)]
    pub data: Option<String>,
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub label_col: Option<String>,
    /// Kernel matrix for models fitted with a precomputed kernel.
    #[arg(long)]
    pub kernel: Option<String>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub model: Option<String>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Kernel matrix for models fitted with a precomputed kernel.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Aligned table with 4 significant digits.
    #[arg(long)]
    pub human: bool,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub reg: RegArgs,
    #[command(flatten)]
    pub landmarks: LandmarkArgs,
    /// `paper` (each of the first k−1 blocks trains, the last tests) or `kfold`.
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long)]
    pub folds: Option<String>,
    /// Shuffle rows before k-fold splitting.
    #[arg(long)]
    pub shuffle: bool,
    /// Landmark draws per fold and size.
    #[arg(long)]
    pub redraws: Option<String>,
    /// Include the full n-coefficient solution.
    #[arg(long)]
    pub full: bool,
    /// Include the LFS aggregate of the Nyström members.
    #[arg(long)]
    pub aggregate: bool,
    /// One row per draw instead of the fold table.
    #[arg(long)]
    pub long: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub reg: RegArgs,
    #[arg(long)]
    pub lambda0_grid: Option<String>,
    #[arg(long)]
    pub lambda1_grid: Option<String>,
    #[arg(long)]
    pub folds: Option<String>,
    /// Nyström landmark count; the full solution when absent.
    #[arg(long)]
    pub landmarks: Option<String>,
    /// `classification` or `regression`.
    #[arg(long)]
    pub task: Option<String>,
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Saved Nyström models, comma separated.
    #[arg(long)]
    pub models: Option<String>,
    #[command(flatten)]
    pub data: DataArgs,
    /// Kernel matrix for models fitted with a precomputed kernel.
    #[arg(long)]
    pub kernel: Option<String>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub gamma_grid: Option<String>,
    /// Landmark count for the Nyström gap.
    #[arg(long)]
    pub landmarks: Option<String>,
    #[arg(long)]
    pub landmark_mode: Option<String>,
    /// Confidence parameter of the sample condition and subsample size.
    #[arg(long)]
    pub eta: Option<String>,
    #[arg(long)]
    pub human: bool,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Kernel of the planted target and of the estimator.
    #[arg(long)]
    pub kernel: Option<String>,
    /// Number of kernel sections in the target.
    #[arg(long)]
    pub anchors: Option<String>,
    #[arg(long)]
    pub dim: Option<String>,
    /// Standard deviation of the label noise.
    #[arg(long)]
    pub noise: Option<String>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub target: TargetArgs,
    /// Source-condition exponent.
    #[arg(long)]
    pub r: Option<String>,
    /// Eigenvalue decay exponent, when known.
    #[arg(long)]
    pub b: Option<String>,
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub test_points: Option<String>,
    /// Add a graph penalty with this bandwidth.
    #[arg(long)]
    pub graph_b: Option<String>,
    #[arg(long)]
    pub scaling: Option<String>,
}

#[derive(Debug, Args)]
pub struct SyntheticArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub target: TargetArgs,
    /// Labeled rows.
    #[arg(long)]
    pub labeled: Option<String>,
    /// Total rows.
    #[arg(long)]
    pub points: Option<String>,
    /// Noiseless target values at every point.
    #[arg(long)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NslKddArgs {
    #[command(flatten)]
    pub common: Common,
    /// Raw NSL-KDD file.
    #[arg(long)]
    pub input: Option<String>,
    /// Read at most this many rows.
    #[arg(long)]
    pub limit: Option<String>,
    /// Rows of the training partition used to fit the scaler.
    #[arg(long)]
    pub fit_rows: Option<String>,
    /// Categorical code table.
    #[arg(long)]
    pub encoding_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MultiviewArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub data: DataArgs,
    /// Feature count of each view, comma separated.
    #[arg(long)]
    pub view_dims: Option<String>,
    /// One kernel per view, or one kernel for all views.
    #[arg(long)]
    pub kernels: Option<String>,
    #[arg(long)]
    pub lambda_a: Option<String>,
    #[arg(long)]
    pub lambda_b: Option<String>,
    #[arg(long)]
    pub lambda_w: Option<String>,
    #[arg(long)]
    pub graph_b: Option<String>,
    #[command(flatten)]
    pub landmarks: LandmarkArgs,
    /// Radius of the weight sphere.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Optimize the weights on validation data.
    #[arg(long)]
    pub optimize: bool,
    /// Alternating rounds when optimizing.
    #[arg(long)]
    pub rounds: Option<String>,
    /// Labeled validation CSV; the labeled training rows when absent.
    #[arg(long)]
    pub validation: Option<String>,
    /// Points to classify; the training points when absent.
    #[arg(long)]
    pub query: Option<String>,
}
