//! Command-line front end for the breakwave laboratory: scenario files in,
//! reports and plot data out.
//!
//! Subcommands: `threshold`, `simulate`, `verify`, `riccati`, `sweep`,
//! `selftest`. Exit codes: 0 success, 2 configuration error, 3 runtime
//! error, 4 verification failure. Identical scenario + seed produce
//! byte-identical outputs: floats print in shortest round-trip form, sweep
//! rows are ordered by grid index regardless of worker count, and nothing
//! writes timestamps.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod selftest;
pub mod sweep;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

/// Command-line error, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
            CliError::Failed(_) => 4,
        }
    }
}

impl From<breakwave::Error> for CliError {
    fn from(e: breakwave::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "breakwave", version, about = "wave-breaking laboratory for nonlocal conservation laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the analytic breaking threshold for a scenario
    Threshold(RunArgs),
    /// Run the finite-volume simulation and write its artifacts
    Simulate(RunArgs),
    /// Threshold plus simulation; PASS iff observed breaking respects the bound
    Verify(RunArgs),
    /// Integrate the slope comparison system for the scenario
    Riccati(RunArgs),
    /// Run the sweep block of a scenario concurrently
    Sweep(RunArgs),
    /// Run the built-in property suites (no scenario file needed)
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Scenario file (JSON)
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for output artifacts
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Override the comparison parameter: a float, or `auto`
    #[arg(long)]
    pub mu: Option<String>,
    /// Override the grid size
    #[arg(long)]
    pub grid: Option<usize>,
    /// Override the scenario seed
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Seed for the randomized suites
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

/// Dispatch a parsed command line; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Threshold(args) => commands::threshold(&load(&args)?, &args.out),
        Command::Simulate(args) => commands::simulate(&load(&args)?, &args.out),
        Command::Verify(args) => commands::verify(&load(&args)?, &args.out),
        Command::Riccati(args) => commands::riccati(&load(&args)?, &args.out),
        Command::Sweep(args) => sweep::run(&args),
        Command::Selftest(args) => selftest::run(args.seed),
    }
}

fn load(args: &RunArgs) -> Result<config::Scenario, CliError> {
    let mut scenario = config::Scenario::load(&args.config)?;
    scenario.apply_overrides(args.mu.as_deref(), args.grid, args.seed)?;
    Ok(scenario)
}
