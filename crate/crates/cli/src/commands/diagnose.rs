//! `mape diagnose` — is the relative-error risk of a target distribution
//! even finite?
//!
//! The risk `J(m) = E|m - T| / |T|` is finite for every `m` exactly when
//! `P(T = 0) = 0` and the series `sum_k k * P(T in (1/(k+1), 1/k])`
//! converges on both sides of zero. This command evaluates the first `K`
//! terms from a tail cdf — the built-in `linear` (`F(eps) = eps`, a
//! diverging uniform-like tail) or `quadratic` (`F(eps) = eps^2`,
//! converging), or a user CSV — prints checkpoint partial sums, the fitted
//! tail decay slopes and the heuristic verdict.
//!
//! The verdict never changes the exit status: diagnosing a divergent
//! distribution is a successful diagnosis.

use std::path::{Path, PathBuf};

use clap::Args;
use mape_core::finiteness::{finiteness_diagnostic, FinitenessReport, FinitenessVerdict};

use crate::config::ConfigFile;
use crate::dataio::read_numeric_table;
use crate::error::CliError;

#[derive(Args, Debug)]
pub struct DiagnoseArgs {
    /// Tail cdf: `linear`, `quadratic`, or `csv:<path>` (header k,f_pos,f_neg)
    #[arg(long, value_name = "SPEC")]
    pub tail: Option<String>,

    /// Number of series terms to evaluate (must be >= 1)
    #[arg(long)]
    pub k: Option<usize>,

    /// Probability mass exactly at zero [default: 0]
    #[arg(long)]
    pub mass_at_zero: Option<f64>,
}

enum TailSpec {
    Linear,
    Quadratic,
    Csv(PathBuf),
}

fn parse_tail(raw: &str) -> Result<TailSpec, CliError> {
    match raw {
        "linear" => Ok(TailSpec::Linear),
        "quadratic" => Ok(TailSpec::Quadratic),
        other => match other.strip_prefix("csv:") {
            Some(path) if !path.is_empty() => Ok(TailSpec::Csv(PathBuf::from(path))),
            Some(_) => Err(CliError::Input("--tail csv: is missing the path".into())),
            None => Err(CliError::Input(format!(
                "unknown --tail `{other}` (expected linear, quadratic or csv:<path>)"
            ))),
        },
    }
}

/// Read a tail CSV: header `k,f_pos,f_neg`, data rows for k = 1..=K+1 in
/// order, where `f_pos` / `f_neg` are the one-sided tail cdfs evaluated at
/// `eps = 1/k`. Rows beyond K+1 are permitted (a longer table serves any
/// smaller `--k`) and ignored.
fn read_tail_csv(path: &Path, k_max: usize) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let table = read_numeric_table(path)?;
    if table.headers != ["k", "f_pos", "f_neg"] {
        return Err(CliError::Input(format!(
            "tail CSV {}: header must be `k,f_pos,f_neg`, got `{}`",
            path.display(),
            table.headers.join(",")
        )));
    }
    let needed = k_max + 1;
    if table.rows.len() < needed {
        return Err(CliError::Input(format!(
            "tail CSV {}: has {} data row(s); --k {k_max} needs rows for k = 1..={needed}",
            path.display(),
            table.rows.len()
        )));
    }
    let mut pos = Vec::with_capacity(needed);
    let mut neg = Vec::with_capacity(needed);
    for (i, row) in table.rows.iter().take(needed).enumerate() {
        let expected = (i + 1) as f64;
        if row[0] != expected {
            return Err(CliError::Input(format!(
                "tail CSV {}: data row {}: expected k = {expected}, got {}",
                path.display(),
                i + 1,
                row[0]
            )));
        }
        for (name, value) in [("f_pos", row[1]), ("f_neg", row[2])] {
            if !(0.0..=1.0).contains(&value) {
                return Err(CliError::Input(format!(
                    "tail CSV {}: k = {expected}: {name} = {value} is not a probability in [0, 1]",
                    path.display()
                )));
            }
        }
        pos.push(row[1]);
        neg.push(row[2]);
    }
    Ok((pos, neg))
}

/// Checkpoint indices to print: powers of ten up to K, then K itself.
fn checkpoints(k_max: usize) -> Vec<usize> {
    let mut points = Vec::new();
    let mut p = 1usize;
    while p <= k_max {
        points.push(p);
        match p.checked_mul(10) {
            Some(next) => p = next,
            None => break,
        }
    }
    if points.last() != Some(&k_max) {
        points.push(k_max);
    }
    points
}

fn fmt_slope(slope: Option<f64>) -> String {
    match slope {
        Some(s) => format!("{s:.4} (finite needs < -1)"),
        None => "n/a (no fittable tail)".to_string(),
    }
}

fn verdict_explanation(verdict: FinitenessVerdict) -> &'static str {
    match verdict {
        FinitenessVerdict::Finite => {
            "both tails decay faster than 1/k: the relative-error risk appears finite for every prediction"
        }
        FinitenessVerdict::LikelyDivergent => {
            "a tail decays like 1/k or slower: the relative-error risk is likely infinite for every nonzero prediction"
        }
        FinitenessVerdict::ZeroMass => {
            "the distribution puts positive mass exactly at zero: the risk is infinite for every nonzero prediction"
        }
    }
}

pub fn run(args: DiagnoseArgs, cfg: &ConfigFile) -> Result<(), CliError> {
    let tail_raw = cfg
        .resolve(args.tail, "tail")?
        .ok_or_else(|| CliError::Input("missing --tail (or config key `tail`)".into()))?;
    let k_max = cfg
        .resolve(args.k, "k")?
        .ok_or_else(|| CliError::Input("missing --k (or config key `k`)".into()))?;
    let mass_at_zero = cfg
        .resolve(args.mass_at_zero, "mass_at_zero")?
        .unwrap_or(0.0);
    let spec = parse_tail(&tail_raw)?;

    let report: FinitenessReport<f64> = match &spec {
        TailSpec::Linear => finiteness_diagnostic(|e: f64| e, |_: f64| 0.0, mass_at_zero, k_max)?,
        TailSpec::Quadratic => {
            finiteness_diagnostic(|e: f64| e * e, |_: f64| 0.0, mass_at_zero, k_max)?
        }
        TailSpec::Csv(path) => {
            let (pos, neg) = read_tail_csv(path, k_max)?;
            let at = move |values: Vec<f64>| {
                move |eps: f64| {
                    let k = (1.0 / eps).round() as usize;
                    values[k - 1]
                }
            };
            finiteness_diagnostic(at(pos), at(neg), mass_at_zero, k_max)
                .map_err(|e| CliError::Input(format!("tail CSV {}: {e}", path.display())))?
        }
    };

    let tail_desc = match &spec {
        TailSpec::Linear => "linear (F(eps) = eps, positive side)".to_string(),
        TailSpec::Quadratic => "quadratic (F(eps) = eps^2, positive side)".to_string(),
        TailSpec::Csv(path) => format!("csv:{}", path.display()),
    };
    println!(
        "finiteness diagnostic: tail = {tail_desc}, K = {k_max}, mass at zero = {mass_at_zero}"
    );
    println!("term_k = k * [F(1/k) - F(1/(k+1))]; finite risk needs both sides' sums to converge");
    println!("{:>8}  {:>14}  {:>14}", "k", "S_pos(k)", "S_neg(k)");
    for cp in checkpoints(k_max) {
        println!(
            "{cp:>8}  {:>14.6e}  {:>14.6e}",
            report.partial_sums_pos[cp - 1],
            report.partial_sums_neg[cp - 1]
        );
    }
    let final_pos = report.partial_sums_pos[k_max - 1];
    let final_neg = report.partial_sums_neg[k_max - 1];
    println!(
        "positive side: final partial sum S({k_max}) = {final_pos:.6e}, tail slope = {}",
        fmt_slope(report.slope_pos)
    );
    println!(
        "negative side: final partial sum S({k_max}) = {final_neg:.6e}, tail slope = {}",
        fmt_slope(report.slope_neg)
    );
    println!("verdict: {}", report.verdict.name());
    println!("{}", verdict_explanation(report.verdict));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    #[test]
    fn tail_spec_parsing() {
        assert!(matches!(parse_tail("linear").unwrap(), TailSpec::Linear));
        assert!(matches!(
            parse_tail("quadratic").unwrap(),
            TailSpec::Quadratic
        ));
        match parse_tail("csv:tails/t.csv").unwrap() {
            TailSpec::Csv(p) => assert_eq!(p, PathBuf::from("tails/t.csv")),
            _ => panic!("expected the csv variant"),
        }
        assert!(parse_tail("csv:").is_err());
        assert!(parse_tail("cubic").is_err());
    }

    #[test]
    fn checkpoint_grids() {
        assert_eq!(checkpoints(1), vec![1]);
        assert_eq!(checkpoints(9), vec![1, 9]);
        assert_eq!(checkpoints(10), vec![1, 10]);
        assert_eq!(checkpoints(1000), vec![1, 10, 100, 1000]);
        assert_eq!(checkpoints(1234), vec![1, 10, 100, 1000, 1234]);
    }

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn tail_csv_happy_path_and_rejections() {
        // Quadratic tail tabulated for k = 1..=4 serves --k 3.
        let mut body = String::from("k,f_pos,f_neg\n");
        for k in 1..=4u32 {
            let eps = 1.0 / f64::from(k);
            body.push_str(&format!("{k},{},0.0\n", eps * eps));
        }
        let good = write_temp(&body);
        let (pos, neg) = read_tail_csv(good.path(), 3).unwrap();
        assert_eq!(pos.len(), 4);
        assert_eq!(neg, vec![0.0; 4]);
        assert!((pos[1] - 0.25).abs() < 1e-15);

        let short = write_temp("k,f_pos,f_neg\n1,1.0,0.0\n");
        let err = read_tail_csv(short.path(), 3).unwrap_err();
        assert!(
            err.to_string().contains("needs rows for k = 1..=4"),
            "{err}"
        );

        let bad_header = write_temp("k,pos,neg\n1,1.0,0.0\n2,0.5,0.0\n");
        assert!(read_tail_csv(bad_header.path(), 1)
            .unwrap_err()
            .to_string()
            .contains("header must be"));

        let bad_k = write_temp("k,f_pos,f_neg\n1,1.0,0.0\n3,0.5,0.0\n");
        let err = read_tail_csv(bad_k.path(), 1).unwrap_err();
        assert!(err.to_string().contains("expected k = 2"), "{err}");

        let bad_prob = write_temp("k,f_pos,f_neg\n1,1.5,0.0\n2,0.5,0.0\n");
        let err = read_tail_csv(bad_prob.path(), 1).unwrap_err();
        assert!(err.to_string().contains("not a probability"), "{err}");
    }
}
