//! Run the full default experiment (all ten `a` rows) and print the
//! summary table plus wall-clock timing. Library-level equivalent of the
//! CLI's `simulate` command.

use mape_core::simulation::{format_report_table, run_experiment, SimConfig};

fn main() {
    let config = SimConfig::<f64>::default();
    let t0 = std::time::Instant::now();
    let report = run_experiment(&config).unwrap();
    println!("{}", format_report_table(&report));
    for (row, curve) in report.rows.iter().zip(report.curves.iter()) {
        if let Some(c) = curve {
            let mean_abs_mape: f64 =
                c.f_mape.iter().map(|v| v.abs()).sum::<f64>() / c.f_mape.len() as f64;
            let mean_abs_mae: f64 =
                c.f_mae.iter().map(|v| v.abs()).sum::<f64>() / c.f_mae.len() as f64;
            let max_gap = c
                .f_mae
                .iter()
                .zip(c.f_mape.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            println!(
                "a = {:>5}: mean|f_mape| = {:.4}  mean|f_mae| = {:.4}  max|f_mae - f_mape| = {:.4}",
                row.a, mean_abs_mape, mean_abs_mae, max_gap
            );
        }
    }
    println!("total: {:.1}s", t0.elapsed().as_secs_f64());
}
