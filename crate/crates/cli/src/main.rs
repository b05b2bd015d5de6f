//! `l0pd`: solve, simulate, benchmark and brute-force best subset selection
//! problems from CSV files.

mod bench;
mod data;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "l0pd", version, about = "Primal-dual best subset selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit one dataset and write the solution JSON.
    Solve(SolveArgs),
    /// Draw a synthetic dataset and its ground truth.
    Simulate(SimulateArgs),
    /// Run a grid of synthetic experiments and write one CSV row per run.
    Bench(BenchArgs),
    /// Exhaustive search over all supports (small p only).
    Oracle(OracleArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Primdual,
    Dualast,
    Cdss,
    Diht,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Toggle {
    On,
    Off,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
pub enum LogBaseArg {
    #[value(name = "e")]
    E,
    #[value(name = "10")]
    Ten,
    #[value(name = "2")]
    Two,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleArg {
    Fixed,
    #[value(name = "inverse-t")]
    InverseT,
}

/// Penalty and preprocessing flags shared by every solver command.
#[derive(Args, Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 0.03)]
    pub lambda0: f64,
    #[arg(long, default_value_t = 0.02)]
    pub lambda1: f64,
    #[arg(long, default_value_t = 1.0)]
    pub lambda2: f64,
    /// Center and unit-normalize the columns of X and center y.
    #[arg(long, value_enum, default_value_t = Toggle::On)]
    pub standardize: Toggle,
}

#[derive(Args, Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = Algo::Primdual)]
    pub algo: Algo,
    /// Sparsity level for `diht`.
    #[arg(long)]
    pub k: Option<usize>,
    /// Dual step size.
    #[arg(long, default_value_t = 0.0005)]
    pub step: f64,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Fixed)]
    pub schedule: ScheduleArg,
    /// Inner stop on the sub-problem gap.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Inner stop on the gap change over two iterations.
    #[arg(long, default_value_t = 1e-6)]
    pub zeta: f64,
    /// Outer stop on the full-problem gap (defaults to --eps).
    #[arg(long)]
    pub xi: Option<f64>,
    /// Inclusion batch constant in ceil(c log p).
    #[arg(long, default_value_t = 4.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value_t = LogBaseArg::E)]
    pub log_base: LogBaseArg,
    #[arg(long)]
    pub init_size: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub max_inner: usize,
    #[arg(long, default_value_t = 10_000)]
    pub max_outer: usize,
    /// Coordinate-descent passes per inner iteration.
    #[arg(long, default_value_t = 1)]
    pub cd_passes: usize,
    /// Disable the safe screening rule.
    #[arg(long)]
    pub no_screening: bool,
    /// Write zero for every timing field so repeated runs are byte-identical.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Solution JSON; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-step trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Run record JSON (config snapshot, dataset hash, timing).
    #[arg(long)]
    pub record: Option<PathBuf>,
    /// Accepted for interface uniformity; solving is deterministic.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 0.4)]
    pub rho: f64,
    #[arg(long, default_value_t = 20.0)]
    pub snr: f64,
    /// Fraction of nonzero true coefficients.
    #[arg(long, default_value_t = 0.03)]
    pub sparsity: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub coef_low: f64,
    #[arg(long, default_value_t = 1.0)]
    pub coef_high: f64,
    #[arg(long, default_value_t = 0.1)]
    pub coef_floor: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth JSON; defaults to `<out>.truth.json`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',', default_value = "200")]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 3000)]
    pub p: usize,
    /// Comma-separated signal-to-noise ratios.
    #[arg(long, value_delimiter = ',', default_value = "20")]
    pub snr: Vec<f64>,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', value_enum, default_value = "primdual")]
    pub algos: Vec<Algo>,
    #[arg(long, default_value_t = 50)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.4)]
    pub rho: f64,
    #[arg(long, default_value_t = 0.03)]
    pub sparsity: f64,
    #[arg(long, default_value_t = 0.1)]
    pub coef_floor: f64,
    /// Replicate r of every setting uses seed + r.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = l0pd::oracle::DEFAULT_MAX_P)]
    pub max_p: usize,
    #[command(flatten)]
    pub model: ModelArgs,
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(a) => run::cmd_solve(&a),
        Command::Simulate(a) => run::cmd_simulate(&a),
        Command::Bench(a) => bench::cmd_bench(&a),
        Command::Oracle(a) => run::cmd_oracle(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
