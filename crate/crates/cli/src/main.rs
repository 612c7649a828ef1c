//! `fracheat` — command-line driver for the fractional-colored stochastic
//! heat equation library: covariance tables, exact-in-law path ensembles,
//! exponent estimation, and a fourteen-check verification battery.

mod checks;
mod config;
mod report;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config, Overrides, Task};
use tasks::TaskFailure;

const LONG_ABOUT: &str = "\
Numerical engine for the Gaussian solution of a stochastic heat equation \
driven by noise that is fractional in time and colored in space: exact \
covariance tables, exact-in-law path ensembles, variogram-exponent \
estimation, and a fourteen-check verification battery.

Configuration is layered: built-in defaults, then an optional TOML file \
(--config), then command-line flags; every value a flag overrides is echoed \
before the task runs. Outputs land in the configured directory as \
report.json (schema_version 1) and results.csv, plus task-specific tables \
(covariance.csv, ensemble.bin/.csv, variogram.csv).

Environment: FRACHEAT_THREADS caps the worker pool; 0 or unset uses every \
core.

Exit codes: 0 success, 1 verification or judged-result failure, \
2 configuration or usage error, 3 numerical failure (a partial report is \
still written).";

#[derive(Parser)]
#[command(name = "fracheat", version, about = "Covariance tables, path ensembles, and verification for a fractional-colored stochastic heat equation", long_about = LONG_ABOUT)]
struct Cli {
    /// TOML run configuration; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the covariance matrix on the configured grid
    Covariance,
    /// Draw a path ensemble and write it in the configured formats
    Sample,
    /// Fit a variogram exponent to a stored ensemble binary
    Estimate,
    /// Run the fourteen-check verification battery
    Verify {
        /// Deliberately corrupt one named check's theory value to exercise
        /// the failure path
        #[arg(long, value_name = "CHECK")]
        corrupt: Option<String>,
    },
    /// Merge report.json files from earlier runs into one document
    Report {
        /// Reports to merge, in order
        #[arg(required = true, value_name = "REPORT")]
        inputs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, TaskFailure> {
    init_threads()?;
    let task = match &cli.command {
        Command::Covariance => Task::Covariance,
        Command::Sample => Task::Sample,
        Command::Estimate => Task::Estimate,
        Command::Verify { .. } => Task::Verify,
        Command::Report { .. } => Task::Report,
    };
    let (cfg, applied) = parse_config(cli.config.as_deref(), task, &cli.overrides)?;
    for line in &applied {
        println!("override {line}");
    }
    match cli.command {
        Command::Covariance => tasks::run_covariance(&cfg, &applied),
        Command::Sample => tasks::run_sample(&cfg, &applied),
        Command::Estimate => tasks::run_estimate(&cfg, &applied),
        Command::Verify { corrupt } => tasks::run_verify(&cfg, &applied, corrupt.as_deref()),
        Command::Report { inputs } => tasks::run_report(&cfg, &applied, &inputs),
    }
}

/// Sizes the global worker pool from `FRACHEAT_THREADS` before any parallel
/// work starts. Unset or `0` keeps the default of one worker per core.
fn init_threads() -> Result<(), TaskFailure> {
    let raw = match std::env::var("FRACHEAT_THREADS") {
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => {
            return Err(TaskFailure::Config(format!(
                "cannot read FRACHEAT_THREADS: {e}"
            )))
        }
        Ok(raw) => raw,
    };
    let n: usize = raw.trim().parse().map_err(|_| {
        TaskFailure::Config(format!(
            "FRACHEAT_THREADS must be a nonnegative integer, got {raw:?}"
        ))
    })?;
    if n == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| TaskFailure::Config(format!("cannot size the worker pool: {e}")))
}
