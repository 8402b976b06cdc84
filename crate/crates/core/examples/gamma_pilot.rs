//! Pilot used to pin the harness's default Gaussian kernel width.
//!
//! Runs the a ∈ {1, 5} experiment rows at γ ∈ {0.1, 1, 10} and prints the
//! test MAPE of both models per γ, to be compared against the reference
//! magnitudes (a=1: ≈51%/≈40%; a=5: ≈4.8%/4.9%).

use mape_core::simulation::{run_experiment, SimConfig};

fn main() {
    for gamma in [0.1, 1.0, 10.0] {
        let config = SimConfig::<f64> {
            a_values: vec![1.0, 5.0],
            gamma,
            ..SimConfig::default()
        };
        let t0 = std::time::Instant::now();
        let report = run_experiment(&config).unwrap();
        println!("gamma = {gamma}  ({:.1}s)", t0.elapsed().as_secs_f64());
        for row in &report.rows {
            println!(
                "  a = {:>4}: mape(f_mae) = {:>7.2}%  mape(f_mape) = {:>7.2}%  c_mae = {}  c_mape = {}  converged = {}/{}",
                row.a,
                row.mape_mae_pct,
                row.mape_mape_pct,
                row.c_mae,
                row.c_mape,
                row.mae_diagnostics.as_ref().map(|d| d.converged).unwrap_or(false),
                row.mape_diagnostics.as_ref().map(|d| d.converged).unwrap_or(false),
            );
        }
    }
}
