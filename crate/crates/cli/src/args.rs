//! Command-line arguments. Every field is optional so the same structs can be
//! read from a config file and merged: flags win over the file, the file
//! wins over built-in defaults.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "missreg",
    version,
    about = "Sparse regression with missing covariates"
)]
pub struct Cli {
    /// TOML file with one table per command ([generate], [impute], [fit],
    /// [experiment]); keys are the long flag names with '_' for '-'.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a design with missing entries, a response and the truth.
    Generate(GenerateArgs),
    /// Fill the NA cells of a design.
    Impute(ImputeArgs),
    /// Run the LASSO or square-root LASSO on a complete design.
    Fit(FitArgs),
    /// Monte Carlo sweep; writes .dat tables.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Identity,
    Ar1,
    Banded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Zero,
    Ar1,
    Graphical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Lasso,
    SqrtLasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    Fig1,
    Fig2,
    Fig3,
    SqrtPivotal,
    Mnar,
}

macro_rules! merge_impl {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl $ty {
            /// Fill every unset field from `cfg`.
            pub fn merge(self, cfg: Self) -> Self {
                Self { $($field: self.$field.or(cfg.$field)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateArgs {
    /// Covariance of the rows [default: identity]
    #[arg(long, value_enum)]
    pub model: Option<Model>,
    /// Rows [default: 100]
    #[arg(long)]
    pub n: Option<usize>,
    /// Columns [default: 50]
    #[arg(long)]
    pub p: Option<usize>,
    /// Probability that a cell is observed, in (0, 1] [default: 0.8]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// AR(1) coefficient, or off-diagonal precision entry for banded
    /// [default: 0.5 for ar1, 0.25 for banded]
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Precision bandwidth for banded [default: 3]
    #[arg(long)]
    pub bandwidth: Option<usize>,
    /// Noise standard deviation [default: 0]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Where design.csv, response.csv, truth.json (and graph.txt) go [default: .]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
merge_impl!(GenerateArgs {
    model,
    n,
    p,
    alpha,
    phi,
    bandwidth,
    sigma,
    seed,
    out_dir
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImputeArgs {
    /// Design CSV with NA cells
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output CSV [default: imputed.csv]
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// [default: zero]
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    /// Known AR(1) coefficient
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// Estimate the AR(1) coefficient from the data
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub estimate_phi: Option<bool>,
    /// Observation probability used by the estimators [default: observed fraction]
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Sparsity graph of the precision matrix (required by graphical)
    #[arg(long)]
    pub graph: Option<PathBuf>,
}
merge_impl!(ImputeArgs {
    input,
    output,
    method,
    phi,
    estimate_phi,
    alpha,
    graph
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitArgs {
    /// Complete design CSV
    #[arg(long)]
    pub design: Option<PathBuf>,
    /// Response CSV, one column
    #[arg(long)]
    pub response: Option<PathBuf>,
    /// [default: lasso]
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    /// Penalty; excludes --schedule
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Named penalty schedule: identity-mcar, identity-mcar-bound,
    /// subgaussian-mcar, mnar, ar1, ar1-theory, graphical, sqrt-pivotal
    #[arg(long)]
    pub schedule: Option<String>,
    /// Schedule input
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Schedule input: noise level
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Schedule input: sub-Gaussian parameter of the rows
    #[arg(long)]
    pub sigma_x: Option<f64>,
    /// Schedule input: ||beta0||_2
    #[arg(long)]
    pub radius: Option<f64>,
    /// Schedule input: largest eigenvalue of the design covariance
    #[arg(long)]
    pub sigma_max_eig: Option<f64>,
    /// Schedule input: sparsity
    #[arg(long)]
    pub s: Option<usize>,
    /// Multiplies the scheduled penalty [default: 1]
    #[arg(long)]
    pub lambda_scale: Option<f64>,
    /// [default: 1e-8]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Coordinate-descent cycles [default: 100000]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Fit an unpenalized intercept [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub intercept: Option<bool>,
    /// Scale columns to unit variance before fitting [default: false]
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub standardize: Option<bool>,
    /// Coefficient file, one value per line [default: coefficients.txt]
    #[arg(long)]
    pub output: Option<PathBuf>,
}
merge_impl!(FitArgs {
    design,
    response,
    solver,
    lambda,
    schedule,
    alpha,
    sigma,
    sigma_x,
    radius,
    sigma_max_eig,
    s,
    lambda_scale,
    tol,
    max_iter,
    intercept,
    standardize,
    output,
});

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentArgs {
    #[arg(long, value_enum)]
    pub experiment: Option<ExperimentName>,
    /// [default: 400]
    #[arg(long)]
    pub n: Option<usize>,
    /// [default: 480]
    #[arg(long)]
    pub p: Option<usize>,
    /// [default: 20]
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated observation probabilities [default: per experiment]
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// [default: 20240601]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise level [default: 0]
    #[arg(long)]
    pub sigma: Option<f64>,
    /// [default: 1]
    #[arg(long)]
    pub lambda_scale: Option<f64>,
    /// Smallest penalty used [default: 1e-4]
    #[arg(long)]
    pub lambda_floor: Option<f64>,
    /// [default: 1e-8]
    #[arg(long)]
    pub tol: Option<f64>,
    /// [default: 100000]
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// fig2: AR(1) coefficient [default: 0.5]; fig3: precision entry [default: 0.25]
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// fig3 bandwidth [default: 3]
    #[arg(long)]
    pub bandwidth: Option<usize>,
    /// fig3: comma-separated dimensions, one table each [default: p]
    #[arg(long, value_delimiter = ',')]
    pub p_list: Option<Vec<usize>>,
    /// n=1000, p=1200, trials=100 before other overrides
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub paper_scale: Option<bool>,
    /// [default: .]
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}
merge_impl!(ExperimentArgs {
    experiment,
    n,
    p,
    trials,
    alphas,
    seed,
    sigma,
    lambda_scale,
    lambda_floor,
    tol,
    max_iter,
    phi,
    bandwidth,
    p_list,
    paper_scale,
    out_dir,
});

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub generate: GenerateArgs,
    pub impute: ImputeArgs,
    pub fit: FitArgs,
    pub experiment: ExperimentArgs,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::usage("InvalidConfig", e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::usage("InvalidConfig", format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::usage("InvalidConfig", format!("{}: {e}", path.display())))
    }
}
