//! `lbf`: run the LBF and AC solvers on MATPOWER feeders and export the
//! results as CSV and JSON.

mod commands;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use failure::Failure;

#[derive(Parser)]
#[command(name = "lbf", version, about = "Linearized branch flow vs exact AC power flow on radial feeders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one case with LBF or the AC sweep and write bus and branch CSVs.
    Solve(SolveArgs),
    /// Run both solvers and write signed error CSVs plus a summary JSON.
    Compare(CompareArgs),
    /// Run a parameter sweep described by a key=value config file.
    Sweep(SweepArgs),
    /// Time LBF and AC over seeded random load scenarios.
    Bench(BenchArgs),
}

#[derive(Args)]
pub struct CaseArgs {
    /// MATPOWER case file, or builtin:NAME for an embedded feeder (case33bw, case69, case141).
    #[arg(long)]
    pub case: String,
    /// Slack voltage magnitude in p.u. [default: generator setpoint or Vm from the case]
    #[arg(long)]
    pub slack_voltage: Option<f64>,
    /// Reference profile: slack 1.05 p.u., tol 1e-10, a restricted to 1.0 and 1.08.
    #[arg(long, conflicts_with_all = ["slack_voltage", "tol"])]
    pub reference_profile: bool,
    /// Output directory.
    #[arg(long, env = "LBF_OUT_DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct AcArgs {
    /// AC convergence tolerance on max |dV| per iteration, p.u.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// AC iteration cap.
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    /// Fraction of each AC voltage update applied, in (0, 1].
    #[arg(long, default_value_t = 1.0)]
    pub damping: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Lbf,
    Ac,
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub ac: AcArgs,
    #[arg(long, value_enum, default_value_t = Model::Lbf)]
    pub model: Model,
    /// LBF scaling coefficient.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
}

#[derive(Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub ac: AcArgs,
    /// LBF scaling coefficient [default: 1.0; both 1.0 and 1.08 with --reference-profile]
    #[arg(long)]
    pub a: Option<f64>,
    /// AC currents below this (p.u.) get no relative flow error.
    #[arg(long, default_value_t = lbf_core::DEFAULT_FLOW_FLOOR)]
    pub flow_floor: f64,
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub ac: AcArgs,
    /// Sweep config file (keys: target, ids, values, a, focus).
    #[arg(long)]
    pub config: PathBuf,
    /// AC currents below this (p.u.) get no relative flow error.
    #[arg(long, default_value_t = lbf_core::DEFAULT_FLOW_FLOOR)]
    pub flow_floor: f64,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub case: CaseArgs,
    #[command(flatten)]
    pub ac: AcArgs,
    /// Number of random load scenarios.
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub scenarios: u64,
    /// Seed of the scenario generator.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 1 times every scenario sequentially.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    /// LBF scaling coefficient.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<(), Failure> = match cli.command {
        Command::Solve(args) => commands::solve(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Bench(args) => commands::bench(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lbf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
