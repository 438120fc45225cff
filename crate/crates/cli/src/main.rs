//! `sdelimits`: simulation, bounds, estimation and verification experiments
//! from the command line.
//!
//! Every subcommand resolves its settings from built-in defaults, an optional
//! JSON file (`--config`) and flags, in that order, and writes the resolved
//! document next to its outputs as `config.json`.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{bound, estimate, kzz, phase, simulate, spring, Context};
use error::CliResult;

#[derive(Debug, Parser)]
#[command(name = "sdelimits", version, about = "Learning limits for drift coefficients of SDEs")]
struct Cli {
    /// JSON config document; flags override its fields.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for Monte-Carlo trials.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path and write it as trajectory CSV.
    Simulate(simulate::SimulateArgs),
    /// Evaluate the observation-time lower bound for a model class.
    Bound(bound::BoundArgs),
    /// Fit the drift of one path and compare its signed support with the truth.
    Estimate(estimate::EstimateArgs),
    /// Sweep recovery success over observation times and dimensions.
    Phase(phase::PhaseArgs),
    /// Check the mutual-information identity by Monte Carlo.
    Kzz(kzz::KzzArgs),
    /// Recover the springs of a mass-spring network at increasing T.
    ReproduceSpring(spring::SpringArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    let ctx = Context { config: cli.config, seed: cli.seed, out: cli.out, threads: cli.threads };
    match &cli.command {
        Command::Simulate(a) => simulate::run(a, &ctx),
        Command::Bound(a) => bound::run(a, &ctx),
        Command::Estimate(a) => estimate::run(a, &ctx),
        Command::Phase(a) => phase::run(a, &ctx),
        Command::Kzz(a) => kzz::run(a, &ctx),
        Command::ReproduceSpring(a) => spring::run(a, &ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
