//! `parareal` command-line driver.
//!
//! Exit codes: 0 success, 1 configuration error, 2 run failure,
//! 3 Parareal not converged (outputs still written).

mod commands;
mod config;
mod model;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Options};
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "parareal",
    version,
    about = "Sequential and Parareal runs of the NI coil model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory (overrides `run.out_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for the fine loop; defaults to min(N, available cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,

    /// Accepted for interface compatibility; nothing here is random.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fine propagator over the whole interval.
    Sequential,
    /// Parareal with automatic time-window partitioning.
    Parareal {
        /// Also time a sequential fine run and report the actual speedup.
        #[arg(long)]
        with_baseline: bool,
    },
    /// Window-count by fine-tolerance sweep.
    Study,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    let opts = Options {
        out: cli.out,
        workers: cli.workers.map(|w| w as usize),
    };
    match cli.command {
        Command::Sequential => commands::sequential(&cfg, &opts),
        Command::Parareal { with_baseline } => commands::parareal(&cfg, &opts, with_baseline),
        Command::Study => commands::study(&cfg, &opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
