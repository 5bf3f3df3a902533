//! `varireg`: register warped functional data from CSV files, simulate
//! benchmark samples with known truth, and score registrations.

mod commands;
mod config;
mod failure;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use failure::{CliResult, Failure};

#[derive(Parser)]
#[command(
    name = "varireg",
    version,
    about = "Registration of warped functional data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Register a sample of curves read from CSV.
    Register(Invocation),
    /// Simulate a warped sample together with its ground truth.
    Simulate(Invocation),
    /// Score a registration, optionally against simulated truth.
    Diagnose(Invocation),
}

#[derive(Args)]
struct Invocation {
    /// Flat JSON file of option defaults; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    options: RunConfig,
}

fn run(cli: Cli) -> CliResult<()> {
    let (Command::Register(inv) | Command::Simulate(inv) | Command::Diagnose(inv)) = &cli.command;
    let cfg = match &inv.config {
        Some(path) => inv.options.clone().overlay(RunConfig::load(path)?),
        None => inv.options.clone(),
    };
    if let Some(n) = cfg.thread_count()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(1, e.to_string()))?;
    }
    match cli.command {
        Command::Register(_) => commands::register(&cfg),
        Command::Simulate(_) => commands::simulate(&cfg),
        Command::Diagnose(_) => commands::diagnose(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(u8::try_from(f.code).unwrap_or(1))
        }
    }
}
