//! `monoctl`: run, compare and self-test the monotonic and gradient solvers.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use monotonic_control::ControlError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver failure: {0}")]
    Solver(ControlError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<ControlError> for CliError {
    fn from(e: ControlError) -> Self {
        match e {
            ControlError::Config(msg) | ControlError::Construction(msg) => CliError::Config(msg),
            other => CliError::Solver(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) | CliError::Io(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "monoctl", version, about = "Monotonic optimal-control solver with a gradient baseline")]
struct Cli {
    /// Output directory; overrides `output` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks; overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the solver(s) selected in the config.
    Run { config: PathBuf },
    /// Run both solvers from the same initial control and compare them.
    Compare { config: PathBuf },
    /// Check the solver invariants on every problem at reduced size.
    Selftest,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Run { config } => commands::run(config, cli.out.as_deref(), cli.seed),
        Command::Compare { config } => commands::compare(config, cli.out.as_deref(), cli.seed),
        Command::Selftest => commands::selftest(cli.seed.unwrap_or(0)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("monoctl: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
