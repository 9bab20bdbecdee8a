//! `sabatier`: simulate the microchannel methanation reactor, fit kinetics
//! and optimize wall temperatures and feed.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Overrides, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "sabatier",
    version,
    about = "Sabatier microchannel reactor simulation and optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration; defaults apply to every missing key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Species coefficient file replacing the bundled data.
    #[arg(long, global = true)]
    species: Option<PathBuf>,
    /// Experiment CSV for `fit`.
    #[arg(long, global = true)]
    experiments: Option<PathBuf>,
    /// Seed of the synthetic measurement noise.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Equilibrium conversion over a temperature and pressure grid.
    Equilibrium,
    /// Steady state at the configured operating point.
    Simulate,
    /// Identify kinetic parameters from measured conversions.
    Fit,
    /// Tracking or flow maximization, chosen by `scenario.problem`.
    Optimize,
    /// Synthetic measurements on the standard 21-point grid.
    GenerateData,
    /// Print the default configuration with comments.
    PrintConfig,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Command::PrintConfig = cli.command {
        print!("{}", config::annotated_defaults());
        return Ok(());
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.apply(&Overrides {
        out: cli.out,
        species: cli.species,
        experiments: cli.experiments,
        seed: cli.seed,
        jobs: cli.jobs,
    });
    cfg.validate()?;
    if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Equilibrium => commands::equilibrium(&cfg),
        Command::Simulate => commands::simulate(&cfg),
        Command::Fit => commands::fit(&cfg),
        Command::Optimize => commands::optimize(&cfg),
        Command::GenerateData => commands::generate_data(&cfg),
        Command::PrintConfig => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
