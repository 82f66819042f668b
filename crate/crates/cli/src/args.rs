use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fedlat_core::optimizer::Scheme;

#[derive(Debug, Parser)]
#[command(
    name = "fedlat",
    version,
    about = "Delay-optimal resource allocation for federated learning over FDMA uplinks"
)]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a random scenario and write it as JSON.
    Gen(GenArgs),
    /// Solve a scenario file with one scheme and write the allocation as JSON.
    Optimize(OptimizeArgs),
    /// Mean delay per scheme over seeded scenario draws, as CSV.
    Sweep(SweepArgs),
    /// Run federated training and write the per-round log as CSV.
    Train(TrainArgs),
    /// Run the acceptance checks and report pass/fail per criterion.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ScenarioOverrides {
    /// Maximum transmit power of every user, dBm.
    #[arg(long)]
    pub p_max_dbm: Option<f64>,
    /// Total uplink bandwidth, Hz.
    #[arg(long)]
    pub bandwidth_hz: Option<f64>,
    /// Size of one model upload, bits.
    #[arg(long)]
    pub upload_bits: Option<f64>,
    /// Samples per user.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Maximum CPU frequency of every user, Hz.
    #[arg(long)]
    pub f_max_hz: Option<f64>,
    /// Side of the square deployment area, metres.
    #[arg(long)]
    pub area_side_m: Option<f64>,
    /// Global accuracy epsilon0.
    #[arg(long)]
    pub epsilon0: Option<f64>,
    /// Gradient-correction weight xi.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Local step size delta.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of users.
    #[arg(long, default_value_t = 50, value_parser = positive)]
    pub k: u64,
    #[command(flatten)]
    pub overrides: ScenarioOverrides,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Scenario JSON file.
    pub scenario: PathBuf,
    #[arg(long, default_value = "proposed", value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Relative stopping tolerance of the deadline bisection.
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    #[value(name = "p_max_dbm")]
    PMaxDbm,
    #[value(name = "bandwidth_hz")]
    BandwidthHz,
    #[value(name = "K")]
    K,
    #[value(name = "upload_bits")]
    UploadBits,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Parameter to vary.
    #[arg(long)]
    pub param: SweepParam,
    /// Comma-separated values of the parameter.
    #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
    pub values: Vec<f64>,
    /// Scenario draws per value.
    #[arg(long, default_value_t = 50, value_parser = positive)]
    pub draws: u64,
    /// Base seed; draw i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of users when K is not the swept parameter.
    #[arg(long, default_value_t = 50, value_parser = positive)]
    pub k: u64,
    /// Comma-separated schemes (all four when omitted).
    #[arg(long, value_delimiter = ',', value_parser = parse_scheme)]
    pub scheme: Vec<Scheme>,
    #[arg(long, default_value_t = 1e-6)]
    pub rel_tol: f64,
    #[command(flatten)]
    pub overrides: ScenarioOverrides,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Convex,
    Nonconvex,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Numeric CSV (no header, last column is the target); synthetic data when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = LossArg::Convex)]
    pub loss: LossArg,
    /// Local accuracy eta.
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Ridge coefficient added to every local loss.
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    /// Gradient-correction weight xi.
    #[arg(long, default_value_t = 0.1)]
    pub xi: f64,
    /// Local step size delta (1/L of the data when omitted).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Local iterations per round (derived from the data's curvature when omitted).
    #[arg(long)]
    pub local_iters: Option<u64>,
    #[arg(long, default_value_t = 500)]
    pub max_rounds: usize,
    /// Stop once the accuracy ratio reaches this level (needs a known optimum).
    #[arg(long)]
    pub target_accuracy: Option<f64>,
    /// Every initial weight (0 for the convex loss, 1e-3 for the nonconvex one when omitted).
    #[arg(long)]
    pub init: Option<f64>,
    /// Number of users.
    #[arg(long, default_value_t = 5, value_parser = positive)]
    pub users: u64,
    /// Samples per user (synthetic default 100; CSV default splits all rows).
    #[arg(long)]
    pub samples: Option<usize>,
    /// Feature dimension of synthetic data.
    #[arg(long, default_value_t = 10)]
    pub dim: usize,
    /// Hessian condition number of synthetic data.
    #[arg(long, default_value_t = 10.0)]
    pub cond: f64,
    /// Target noise standard deviation of synthetic data.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Seed for the synthetic draw or the CSV row partition.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Fast,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = LevelArg::Fast)]
    pub level: LevelArg,
    /// Print the report as JSON instead of one line per criterion.
    #[arg(long)]
    pub json: bool,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    s.parse()
}

fn positive(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}
