//! `mape predict` — apply a saved model to new data.
//!
//! The input CSV may be features-only (width = the model's input dimension
//! `d`) or a training-style file (width `d + 1`, trailing target column
//! ignored), so the file a model was fitted on can be re-predicted as-is.
//! Predictions are written with 17 significant digits: together with the
//! model format's exact persistence, a fit/predict round trip reproduces
//! in-process predictions bit for bit.

use std::path::PathBuf;

use clap::Args;
use mape_core::model_io::load_model_from_path;
use mape_core::TrainedModel64;

use crate::config::ConfigFile;
use crate::dataio::{
    ensure_writable_parent, feature_matrix, read_numeric_table, write_predictions,
};
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Model file written by `mape fit`
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,

    /// Input data CSV: features only, or features plus a trailing target
    #[arg(long, value_name = "PATH")]
    pub data: Option<PathBuf>,

    /// Where to write the predictions CSV
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

pub fn run(args: PredictArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let model_path = cfg.require_path(args.model, "model", "--model")?;
    let data_path = cfg.require_path(args.data, "data", "--data")?;
    let out_path = cfg.require_path(args.out, "out", "--out")?;

    ensure_writable_parent(&out_path)?;
    if !model_path.is_file() {
        return Err(CliError::Input(format!(
            "model file {} does not exist",
            model_path.display()
        )));
    }

    let model: TrainedModel64 = load_model_from_path(&model_path)?;
    let table = read_numeric_table(&data_path)?;
    let features = feature_matrix(&table, model.dim(), &data_path)?;
    let predictions = model.predict(features.view())?;
    write_predictions(&out_path, &predictions)?;
    println!(
        "wrote {} prediction(s) to {}",
        predictions.len(),
        out_path.display()
    );
    Ok(())
}
