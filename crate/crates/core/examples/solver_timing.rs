//! Timing probe for the SMO solver on simulation-scale instances.
//!
//! Run with `cargo run --release -p mape-core --example solver_timing`.
//! Solves the MAPE and MAE duals of 800-sample noisy-sinc instances for
//! every C on the default cross-validation grid under the budgets the
//! simulation harness uses, and prints per-solve wall time, iterations,
//! and the final KKT gap.

use std::time::Instant;

use mape_core::kernel::KernelSpec;
use mape_core::loss::LossKind;
use mape_core::qp::{make_bounds, solve_dual};
use mape_core::rng::SplitMix64;
use ndarray::Array2;

fn make_data(n: usize, a: f64, seed: u64) -> (Array2<f64>, Vec<f64>) {
    let mut rng = SplitMix64::new(seed);
    let mut x = Array2::<f64>::zeros((n, 1));
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let xi = rng.uniform(-1.0, 1.0);
        x[[i, 0]] = xi;
        let clean = if xi == 0.0 {
            a + 1.0
        } else {
            let t = std::f64::consts::TAU * xi;
            a + t.sin() / t
        };
        let noise = 0.1 * (1.0 - xi).exp() * rng.normal();
        y.push(clean + noise);
    }
    (x, y)
}

fn main() {
    let c_grid = [
        0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 100.0, 1000.0, 1e4, 1e5,
    ];
    for a in [1.0, 100.0] {
        let (x, y) = make_data(800, a, 7);
        let gram = KernelSpec::gaussian(1.0).unwrap().gram_matrix(x.view());
        for kind in [LossKind::Mape, LossKind::Mae] {
            for (label, tol, max_iter) in [("cv", 1e-3, 200_000usize), ("refit", 1e-3, 2_000_000)] {
                println!("--- a = {a}, {} / {label} budget ---", kind.name());
                let mut total = 0.0;
                for &c in &c_grid {
                    let bounds = make_bounds(&y, c, 0.5, kind).unwrap();
                    let start = Instant::now();
                    let sol = solve_dual(gram.view(), &y, &bounds, tol, max_iter).unwrap();
                    let dt = start.elapsed().as_secs_f64();
                    total += dt;
                    println!(
                        "C = {c:>9}: {dt:7.3}s  iters = {:>9}  converged = {}  gap = {:.3e}",
                        sol.iterations, sol.converged, sol.max_kkt_violation
                    );
                }
                println!("total: {total:.3}s");
            }
        }
    }
}
