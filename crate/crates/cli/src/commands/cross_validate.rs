//! `mape cross-validate` — score a C grid by k-fold cross-validation.
//!
//! Each candidate C is scored by the mean held-out empirical risk **under
//! the loss being fitted** (a MAPE model is selected by MAPE, an MAE model
//! by MAE). The table lists every candidate; the final line names the
//! winner, with exact ties broken toward the smaller C.

use std::path::PathBuf;

use clap::Args;
use mape_core::regressor::cross_validate_with_options;

use super::{build_fit_options, build_kernel, build_loss, loss_label, ModelArgs, SolverArgs};
use crate::config::ConfigFile;
use crate::dataio::read_dataset;
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct CrossValidateArgs {
    /// Training data CSV: every column but the last is a feature, the last
    /// is the target
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Comma-separated C grid [default: the built-in grid]
    #[arg(long, value_name = "LIST")]
    pub c_grid: Option<String>,

    /// Number of folds [default: 5]
    #[arg(long)]
    pub folds: Option<usize>,

    /// Seed for the fold assignment [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn run(args: CrossValidateArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let data_path = cfg.require_path(args.data, "data", "--data")?;
    let loss = build_loss(&args.model, cfg)?;
    let kernel = build_kernel(&args.model, cfg, 1.0)?;
    let options = build_fit_options(&args.solver, cfg)?;
    let folds = cfg.resolve(args.folds, "folds")?.unwrap_or(5);
    let seed = cfg.resolve(args.seed, "seed")?.unwrap_or(42);
    let grid = super::resolve_c_grid(args.c_grid, cfg)?;

    let data = read_dataset(&data_path)?;
    let report = cross_validate_with_options(&data, &loss, &kernel, &grid, folds, seed, options)?;

    println!(
        "cross-validation: n = {}, loss = {}, kernel = {}, {} folds, seed {}",
        data.len(),
        loss_label(&loss),
        kernel.name(),
        folds,
        seed
    );
    println!("{:>12}  mean validation risk", "C");
    for (i, &c) in report.grid.iter().enumerate() {
        let row = report.fold_scores.row(i);
        let mean = row.sum() / folds as f64;
        println!("{c:>12}  {mean:.6e}");
    }
    println!("best C = {}", report.best_c);
    Ok(())
}
