//! `mape fit` — train a model on a CSV dataset and save it.
//!
//! With `--c` the model is fitted directly at that regularization constant;
//! without it, k-fold cross-validation over the C grid picks one first and
//! the chosen value is echoed. The summary line reports training risk under
//! the fitted loss, solver iterations and convergence. A fit that exhausts
//! its iteration budget still writes the model file (the artifact is useful
//! for inspection) but exits with code 1.

use std::path::PathBuf;

use clap::Args;
use mape_core::loss::empirical_risk;
use mape_core::model_io::save_model_to_path;
use mape_core::regressor::{cross_validate_with_options, fit_with_options};

use super::{build_fit_options, build_kernel, build_loss, loss_label, ModelArgs, SolverArgs};
use crate::config::ConfigFile;
use crate::dataio::{ensure_writable_parent, read_dataset};
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Training data CSV: every column but the last is a feature, the last
    /// is the target
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,

    /// Where to write the fitted model
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub model: ModelArgs,

    /// Regularization constant C; omit to pick one by cross-validation
    #[arg(long)]
    pub c: Option<f64>,

    /// Comma-separated C grid for cross-validation [default: the built-in grid]
    #[arg(long, value_name = "LIST")]
    pub c_grid: Option<String>,

    /// Cross-validation folds [default: 5]
    #[arg(long)]
    pub folds: Option<usize>,

    /// Seed for the cross-validation fold assignment [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,

    #[command(flatten)]
    pub solver: SolverArgs,
}

pub fn run(args: FitArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let data_path = cfg.require_path(args.data, "data", "--data")?;
    let out_path = cfg.require_path(args.out, "out", "--out")?;
    let loss = build_loss(&args.model, cfg)?;
    let kernel = build_kernel(&args.model, cfg, 1.0)?;
    let options = build_fit_options(&args.solver, cfg)?;
    let c_fixed = cfg.resolve(args.c, "c")?;
    let folds = cfg.resolve(args.folds, "folds")?.unwrap_or(5);
    let seed = cfg.resolve(args.seed, "seed")?.unwrap_or(42);

    ensure_writable_parent(&out_path)?;
    let data = read_dataset(&data_path)?;

    let c = match c_fixed {
        Some(c) => c,
        None => {
            let grid = super::resolve_c_grid(args.c_grid, cfg)?;
            let report =
                cross_validate_with_options(&data, &loss, &kernel, &grid, folds, seed, options)?;
            println!(
                "cross-validated C = {} ({} candidates, {} folds, seed {})",
                report.best_c,
                report.grid.len(),
                folds,
                seed
            );
            report.best_c
        }
    };

    let model = fit_with_options(&data, loss.clone(), kernel, c, options)?;
    let predictions = model.predict(data.x())?;
    let risk = empirical_risk(&predictions, data.y(), &loss)?;
    let diag = *model.diagnostics();
    println!(
        "fit: n = {}, d = {}, loss = {}, C = {} | training risk = {:.6e} | iterations = {} | converged = {}",
        data.len(),
        data.dim(),
        loss_label(&loss),
        c,
        risk,
        diag.iterations,
        diag.converged
    );

    save_model_to_path(&model, &out_path)?;
    println!("model written to {}", out_path.display());

    if !diag.converged {
        return Err(CliError::Runtime(format!(
            "fit did not converge within {} iterations (max KKT violation {:.3e}); \
             the model file was still written",
            diag.iterations, diag.max_kkt_violation
        )));
    }
    Ok(())
}
