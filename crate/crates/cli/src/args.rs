use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "plsdof", version, about = "Partial least squares regression with degrees-of-freedom estimation")]
pub struct Cli {
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, env = "PLSDOF_THREADS")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the PLSR path and write coefficients, fitted values and training RSS.
    Fit(FitArgs),
    /// Degrees of freedom per component count.
    Dof(DofArgs),
    /// Choose the number of components by cross-validation or BIC.
    Select(SelectArgs),
    /// Compare PLSR, PCR and ridge over repeated train/test splits.
    Compare(CompareArgs),
    /// Run the radial-basis simulation study.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Input CSV with a header row.
    #[arg(long, short, required_unless_present = "json_schema")]
    pub input: Option<PathBuf>,
    /// Name of the response column.
    #[arg(long, short, required_unless_present = "json_schema")]
    pub target: Option<String>,
    /// Largest component count (default: min(n - 1, p)).
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Print the JSON schema of this command's output and exit.
    #[arg(long)]
    pub json_schema: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Lanczos,
    Krylov,
    Both,
    Naive,
}

#[derive(Debug, Args)]
pub struct DofArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub engine: Engine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectMethod {
    Cv,
    BicLanczos,
    BicKrylov,
    BicNaive,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value = "bic-krylov")]
    pub method: SelectMethod,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Holdout CSV with the same columns; adds test errors to the output.
    #[arg(long)]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, short, required_unless_present = "json_schema")]
    pub input: Option<PathBuf>,
    #[arg(long, short, required_unless_present = "json_schema")]
    pub target: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 50)]
    pub n_train: usize,
    /// Test rows per split (default: all rows not used for training).
    #[arg(long)]
    pub n_test: Option<usize>,
    #[arg(long, default_value_t = 30)]
    pub m_max: usize,
    /// Comma-separated ridge penalties (default: 20 log-spaced values in [1e-3, 1e4]).
    #[arg(long, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for comparison_metrics.csv, comparison_curves.csv and comparison.json.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Print the JSON schema of this command's output and exit.
    #[arg(long)]
    pub json_schema: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML file with simulation settings; flags override its values.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Replications per basis size (default: 50).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Comma-separated numbers of basis functions.
    #[arg(long, value_delimiter = ',')]
    pub d: Option<Vec<usize>>,
    /// Master seed (default: 0).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Training rows per replication (default: 50).
    #[arg(long)]
    pub n_train: Option<usize>,
    /// Test rows per replication (default: 153, or the remaining base rows).
    #[arg(long)]
    pub n_test: Option<usize>,
    /// Signal-to-noise variance ratio (default: 9).
    #[arg(long)]
    pub snr: Option<f64>,
    /// Largest component count (default: 30).
    #[arg(long)]
    pub m_max: Option<usize>,
    /// Cross-validation folds (default: 10).
    #[arg(long)]
    pub folds: Option<usize>,
    /// CSV whose columns form the base design (rescaled to [-1, 1]).
    #[arg(long)]
    pub base: Option<PathBuf>,
    /// Column of the base CSV to drop, typically its response.
    #[arg(long)]
    pub base_target: Option<String>,
    /// Directory for simulation.csv and simulation.json.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Print the JSON schema of this command's output and exit.
    #[arg(long)]
    pub json_schema: bool,
}
