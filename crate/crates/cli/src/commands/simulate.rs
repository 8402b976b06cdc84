//! `mape simulate` — re-run the translated-sinc experiment.
//!
//! For each translation value `a`, noisy sinc data are generated, an MAE
//! model and a MAPE model are tuned by cross-validation and refitted, and
//! both are scored by test MAPE. Artifacts land in `--out-dir`:
//! `report.csv` (one row per `a`) and `curve_a<a>.csv` (truth and both
//! fitted curves on a 512-point grid). The whole experiment is a pure
//! function of the seed, so identical invocations produce byte-identical
//! files. The output directory is probed for writability before any
//! computation starts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use mape_core::simulation::{
    curve_file_name, format_report_table, run_experiment, write_curve_csv, write_report_csv,
};
use mape_core::SimConfig64;

use crate::config::{parse_float_list, ConfigFile};
use crate::dataio::ensure_writable_dir;
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Directory for report.csv and the curve files (created if missing)
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    /// Comma-separated translation values [default: 0,0.1,0.5,1,2.5,5,10,25,50,100]
    #[arg(long, value_name = "LIST")]
    pub a_list: Option<String>,

    /// Training-set size per row [default: 1000]
    #[arg(long)]
    pub n_train: Option<usize>,

    /// Test-set size per row [default: 1000]
    #[arg(long)]
    pub n_test: Option<usize>,

    /// Root seed; the experiment is a pure function of it [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,

    /// Cross-validation folds [default: 5]
    #[arg(long)]
    pub folds: Option<usize>,

    /// Gaussian kernel width [default: 10]
    #[arg(long)]
    pub gamma: Option<f64>,

    /// Comma-separated C grid [default: the built-in grid]
    #[arg(long, value_name = "LIST")]
    pub c_grid: Option<String>,

    /// Exclude test points with |y| below this from the headline MAPE
    /// denominators [default: 0 — every point counts]
    #[arg(long)]
    pub mape_floor: Option<f64>,
}

pub fn run(args: SimulateArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let out_dir = cfg.require_path(args.out_dir, "out_dir", "--out-dir")?;

    let mut config = SimConfig64::default();
    let a_raw = match args.a_list {
        Some(s) => Some(s),
        None => cfg.get("a_list").map(str::to_string),
    };
    if let Some(raw) = a_raw {
        config.a_values = parse_float_list(&raw, "--a-list")?;
    }
    let c_raw = match args.c_grid {
        Some(s) => Some(s),
        None => cfg.get("c_grid").map(str::to_string),
    };
    if let Some(raw) = c_raw {
        config.c_grid = parse_float_list(&raw, "--c-grid")?;
    }
    if let Some(n) = cfg.resolve(args.n_train, "n_train")? {
        config.n_train = n;
    }
    if let Some(n) = cfg.resolve(args.n_test, "n_test")? {
        config.n_test = n;
    }
    if let Some(seed) = cfg.resolve(args.seed, "seed")? {
        config.seed = seed;
    }
    if let Some(folds) = cfg.resolve(args.folds, "folds")? {
        config.folds = folds;
    }
    if let Some(gamma) = cfg.resolve(args.gamma, "gamma")? {
        config.gamma = gamma;
    }
    if let Some(floor) = cfg.resolve(args.mape_floor, "mape_floor")? {
        config.mape_floor = floor;
    }
    config.validate()?;

    // Fail on an unusable output location before the (long) computation.
    ensure_writable_dir(&out_dir)?;

    let started = Instant::now();
    let report = run_experiment(&config)?;

    let report_path = out_dir.join("report.csv");
    let file = File::create(&report_path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", report_path.display())))?;
    let mut writer = BufWriter::new(file);
    write_report_csv(&report, &mut writer)?;
    writer
        .flush()
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", report_path.display())))?;

    let mut curve_files = 0usize;
    for curve in report.curves.iter().flatten() {
        let path = out_dir.join(curve_file_name(curve.a));
        let file = File::create(&path)
            .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
        let mut writer = BufWriter::new(file);
        write_curve_csv(curve, &mut writer)?;
        writer
            .flush()
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
        curve_files += 1;
    }

    print!("{}", format_report_table(&report));
    println!("report: {}", report_path.display());
    println!("curves: {curve_files} file(s) in {}", out_dir.display());
    println!("total time: {:.1}s", started.elapsed().as_secs_f64());

    let failed: Vec<String> = report
        .rows
        .iter()
        .filter(|row| !row.status.is_ok())
        .map(|row| format!("a={}", row.a))
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Runtime(format!(
            "{} of {} row(s) failed ({}); see the status column in {}",
            failed.len(),
            report.rows.len(),
            failed.join(", "),
            report_path.display()
        )));
    }
    Ok(())
}
