use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "folded-simplex", version, about = "Fit, simulate and test the alpha-folded normal model on compositional data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate alpha, mu, Sigma and p by profile likelihood and EM.
    Fit(FitArgs),
    /// Draw compositions from the model.
    Sample(SampleArgs),
    /// Log-density on a ternary lattice (D = 3).
    Contour(ContourArgs),
    /// Monte-Carlo mass of the normal left outside the simplex.
    Outside(OutsideArgs),
    /// Bootstrap test of alpha = 0.
    Test(TestArgs),
    /// Confidence interval for alpha.
    Ci(CiArgs),
    /// Parameter-recovery simulation study.
    Study(StudyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dataset {
    ArcticLake,
}

#[derive(Debug, Args, Serialize)]
pub struct InputArgs {
    /// Composition file: delimited text, one row per observation.
    #[arg(long, short, conflicts_with = "dataset", required_unless_present = "dataset")]
    pub input: Option<PathBuf>,
    /// Bundled data set instead of a file.
    #[arg(long, value_enum)]
    pub dataset: Option<Dataset>,
    /// Rescale each row to unit sum.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,
    /// Rows to leave out, 1-based, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub drop_rows: Vec<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct SearchArgs {
    /// Step of the alpha grid over [-1, 1].
    #[arg(long, default_value_t = 0.05)]
    pub grid_step: f64,
    /// Skip the Brent refinement of the grid maximum.
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Output file, written atomically next to `<output>.manifest.json`.
    /// Without it the result goes to stdout and no manifest is written.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Mean of the normal on R^(D-1), comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub mu: Vec<f64>,
    /// Covariance as a square CSV file.
    #[arg(long)]
    pub sigma: PathBuf,
    /// Multiply the covariance by this factor.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Fit at this alpha only (0 gives the logistic-normal closed form).
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Include the first k simplex principal components.
    #[arg(long)]
    pub pca: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, short)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ContourArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Lattice divisions per edge.
    #[arg(long, default_value_t = 200)]
    pub resolution: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct OutsideArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10_000_000)]
    pub draws: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Alpha,
    Lr,
}

#[derive(Debug, Args, Serialize)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Bootstrap replicates.
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 299)]
    pub b: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Statistic::Alpha)]
    pub statistic: Statistic,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Percentile,
    Curvature,
}

#[derive(Debug, Args, Serialize)]
pub struct CiArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value_t = CiMethod::Percentile)]
    pub method: CiMethod,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Bootstrap replicates (percentile method).
    #[arg(long = "B", visible_alias = "replicates", default_value_t = 1000)]
    pub b: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Search each replicate around the estimate with this half-width.
    #[arg(long)]
    pub window: Option<f64>,
    /// Finite-difference step (curvature method).
    #[arg(long, default_value_t = 1e-2)]
    pub step: f64,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    PaperDesk,
    AlphaDesk,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args, Serialize)]
pub struct StudyArgs {
    #[arg(long, value_enum, conflicts_with = "config", required_unless_present = "config")]
    pub preset: Option<Preset>,
    /// Study configuration as JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub output: OutputArgs,
}
