mod commands;
mod misspecified;
mod output;
mod reproduce;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Possibility-based inference from likelihoods: contours, probing,
/// marginalization, severity and validity audits. Output is CSV with a
/// `#` metadata header.
#[derive(Debug, Parser)]
#[command(name = "improbe", version)]
pub struct Cli {
    /// Master seed for every simulation.
    #[arg(long, global = true, env = "IMPROBE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Emit a gnuplot script (data inlined) instead of bare CSV. With
    /// `reproduce`, write a script next to each CSV file.
    #[arg(long, global = true)]
    pub gnuplot: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Possibility contour on a grid: `theta,pi` (or `theta,theta2,pi`).
    Contour(ContourArgs),
    /// Possibility and necessity of one-sided hypotheses along a grid.
    Probe(ProbeArgs),
    /// Marginal IM of a feature of the 2x2 table parameter.
    Marginal(MarginalArgs),
    /// Severity next to test-based and likelihood-based necessity.
    Severity(SeverityArgs),
    /// Simulation audit of the validity guarantees.
    Validate(ValidateArgs),
    /// Regenerate the data behind a figure.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Normal,
    Binomial,
    Correlation,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Sampling standard deviation of the mean (normal).
    #[arg(long, default_value_t = 1.0)]
    pub sd: f64,
    /// Observed mean (normal).
    #[arg(long, allow_hyphen_values = true)]
    pub ybar: Option<f64>,
    /// Number of trials (binomial).
    #[arg(long)]
    pub n: Option<u64>,
    /// Observed successes (binomial).
    #[arg(long)]
    pub y: Option<u64>,
    /// CSV data file (`ybar`; `y,n`; `v1,v2`; `y00,y01,y10,y11`).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub calibration: CalibrationArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CalibrationArgs {
    /// Monte Carlo draws per grid point.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Points on a scalar grid.
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    /// Points per axis on the 2x2 table lattice.
    #[arg(long, default_value_t = 201)]
    pub lattice_points: usize,
    /// Require the exact evaluator; fails for models without one.
    #[arg(long, conflicts_with = "mc")]
    pub exact: bool,
    /// Calibrate by Monte Carlo even when an exact evaluator exists.
    #[arg(long)]
    pub mc: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ThetaGridArgs {
    /// First grid point (defaults to the contour grid).
    #[arg(long, requires = "to", allow_hyphen_values = true)]
    pub from: Option<f64>,
    /// Last grid point.
    #[arg(long, requires = "from", allow_hyphen_values = true)]
    pub to: Option<f64>,
    /// Number of points between `--from` and `--to`.
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,
}

#[derive(Debug, Args)]
pub struct ContourArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    /// Hypotheses `Θ > θ`.
    Gt,
    /// Hypotheses `Θ ≤ θ`.
    Leq,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "gt")]
    pub direction: DirectionArg,
    /// Evaluate one hypothesis instead, e.g. `(-inf,150]` or `[0,0.1] U [0.9,1]`.
    #[arg(long, allow_hyphen_values = true)]
    pub hypothesis: Option<String>,
    #[command(flatten)]
    pub grid: ThetaGridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureArg {
    /// `θ0 - θ1`.
    Difference,
    /// `θ0 / θ1`.
    RelativeRisk,
}

#[derive(Debug, Args)]
pub struct MarginalArgs {
    /// 2x2 table CSV; the bundled clinical trial table when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub feature: FeatureArg,
    /// Report the contour and `Π̄(Φ ≤ φ)` at a single value.
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Write `phi,necessity,possibility` for `{Φ > φ}` / `{Φ ≤ φ}` instead of `phi,pi`.
    #[arg(long)]
    pub measures: bool,
    /// Points on the feature grid.
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    /// Points per axis on the joint lattice.
    #[arg(long, default_value_t = 201)]
    pub lattice_points: usize,
    /// Points along each level set.
    #[arg(long, default_value_t = 2001)]
    pub subgrid: usize,
}

#[derive(Debug, Args)]
pub struct SeverityArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub ybar: f64,
    /// Cutoff of the null `Θ ≤ θ0`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sd: f64,
    /// Level deciding between the two cases.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[command(flatten)]
    pub grid: ThetaGridArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    LevelSetAdversary,
    FullSpace,
    FixedFamily,
    RandomIntervals,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Standard deviation the IM assumes (normal).
    #[arg(long, default_value_t = 1.0)]
    pub sd: f64,
    /// Simulate from this standard deviation instead of `--sd` (normal).
    #[arg(long)]
    pub true_sd: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub n_trials: u64,
    /// Number of pairs (correlation).
    #[arg(long, default_value_t = 15)]
    pub pairs: usize,
    /// Row totals of the 2x2 table.
    #[arg(long, value_delimiter = ',', default_value = "25,25")]
    pub rows: Vec<u64>,
    /// True parameter values, comma separated; table values as `a:b`.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub theta: Vec<String>,
    /// Replicates per parameter value.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.05")]
    pub alpha: Vec<f64>,
    /// Audit uniform validity under this probing policy (strong validity otherwise).
    #[arg(long, value_enum, conflicts_with = "error_rates")]
    pub policy: Option<PolicyArg>,
    /// Audit Type-I error and non-coverage instead.
    #[arg(long)]
    pub error_rates: bool,
    /// Cutoff `θ0` of the fixed family `(-inf,θ0]`, `(θ0 + r·step, inf)`;
    /// defaults to the first parameter value.
    #[arg(long, allow_hyphen_values = true)]
    pub family_start: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub family_step: f64,
    #[arg(long, default_value_t = 20)]
    pub family_count: usize,
    /// Intervals drawn per replicate by the random policy.
    #[arg(long, default_value_t = 10)]
    pub random_count: usize,
    /// Null draws per parameter value for models without an exact contour.
    #[arg(long, default_value_t = 100_000)]
    pub null_samples: usize,
    /// Grid points of the IM rebuilt per replicate.
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// One of fig1a, fig1b, fig2a, fig2b, fig3, fig4, fig5.
    pub figure: String,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 2001)]
    pub points: usize,
    #[arg(long, default_value_t = 201)]
    pub lattice_points: usize,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(commands::exit_code(&err))
        }
    }
}
