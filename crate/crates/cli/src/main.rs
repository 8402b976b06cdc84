//! `mape` — kernel regression under relative error, from the command line.
//!
//! Subcommands: `fit`, `predict`, `cross-validate`, `simulate`, `diagnose`.
//! Every subcommand accepts `--config <path>` pointing at a flat `key=value`
//! file; explicit flags override config values, and built-in defaults fill
//! the rest. Exit codes: 0 success, 1 runtime/convergence failure, 2 input
//! error (see [`error`]).

mod commands;
mod config;
mod dataio;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ConfigFile;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "mape",
    version,
    about = "Kernel regression under MAPE, MAE and pinball losses",
    propagate_version = true
)]
struct Cli {
    /// Flat key=value config file; command-line flags override it
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a CSV dataset (features..., target) and save it
    Fit(commands::fit::FitArgs),
    /// Apply a saved model to new data, writing one prediction per row
    Predict(commands::predict::PredictArgs),
    /// Score a C grid by k-fold cross-validation and report the best C
    CrossValidate(commands::cross_validate::CrossValidateArgs),
    /// Run the translated-sinc experiment comparing MAPE and MAE fits
    Simulate(commands::simulate::SimulateArgs),
    /// Check whether a target distribution's relative-error risk is finite
    Diagnose(commands::diagnose::DiagnoseArgs),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::empty(),
    };
    match cli.command {
        Command::Fit(args) => commands::fit::run(args, &cfg),
        Command::Predict(args) => commands::predict::run(args, &cfg),
        Command::CrossValidate(args) => commands::cross_validate::run(args, &cfg),
        Command::Simulate(args) => commands::simulate::run(args, &cfg),
        Command::Diagnose(args) => commands::diagnose::run(args, &cfg),
    }
}

fn main() -> ExitCode {
    // Die silently when stdout closes early (`mape ... | head`), like any
    // other unix filter, instead of panicking on the broken pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    // Clap handles its own usage errors (exit code 2, matching the input
    // error convention) before this body runs.
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
