//! End-to-end tests of the `mape` binary: every subcommand, the documented
//! exit codes, the config-file layering and the bit-exactness contracts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use ndarray::Array2;

fn mape_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mape"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    mape_bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "expected exit {code}\nstdout:\n{}\nstderr:\n{}",
        stdout_of(out),
        stderr_of(out)
    );
}

/// Parse a predictions CSV written by `mape predict`.
fn read_predictions(path: &Path) -> Vec<f64> {
    let text = fs::read_to_string(path).expect("predictions file");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("prediction"), "header line");
    lines
        .map(|l| l.parse().expect("numeric prediction"))
        .collect()
}

/// A small deterministic nonlinear dataset, MAPE-safe (targets in [1.4, 2.6]).
fn sine_csv(path: &Path, rows: usize) {
    let mut body = String::from("x,y\n");
    for i in 0..rows {
        let x = -1.0 + 2.0 * (i as f64) / ((rows - 1) as f64);
        let y = 2.0 + 0.6 * (2.2 * x).sin();
        body.push_str(&format!("{x:.16e},{y:.16e}\n"));
    }
    fs::write(path, body).unwrap();
}

#[test]
fn fit_constant_csv_predicts_the_constant() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.txt");
    let preds = dir.path().join("preds.csv");
    let data = fixture("constant.csv");

    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--c",
        "10",
    ]);
    assert_exit(&out, 0);
    let stdout = stdout_of(&out);
    assert!(stdout.contains("loss = mape"), "{stdout}");
    assert!(stdout.contains("converged = true"), "{stdout}");
    assert!(stdout.contains("model written to"), "{stdout}");

    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);
    for p in read_predictions(&preds) {
        assert!((p - 2.0).abs() < 1e-9, "prediction {p} should be ≈ 2");
    }
}

#[test]
fn fit_predict_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sine.csv");
    let model = dir.path().join("model.txt");
    let preds = dir.path().join("preds.csv");
    sine_csv(&data, 24);

    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--c",
        "5",
        "--gamma",
        "1",
    ]);
    assert_exit(&out, 0);
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        preds.to_str().unwrap(),
    ]);
    assert_exit(&out, 0);

    // In-process reference: load the model file and predict on the same
    // training points.
    let loaded: mape_core::TrainedModel64 =
        mape_core::model_io::load_model_from_path(&model).unwrap();
    let mut x = Array2::zeros((24, 1));
    for i in 0..24 {
        x[(i, 0)] = -1.0 + 2.0 * (i as f64) / 23.0;
    }
    let reference = loaded.predict(x.view()).unwrap();

    let cli_preds = read_predictions(&preds);
    assert_eq!(cli_preds.len(), reference.len());
    for (file_value, ref_value) in cli_preds.iter().zip(&reference) {
        assert_eq!(
            file_value.to_bits(),
            ref_value.to_bits(),
            "file {file_value:e} vs in-process {ref_value:e}"
        );
    }
}

#[test]
fn predict_accepts_feature_only_files() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sine.csv");
    let features_only = dir.path().join("features.csv");
    let model = dir.path().join("model.txt");
    sine_csv(&data, 16);

    // Same file with the target column stripped.
    let full = fs::read_to_string(&data).unwrap();
    let stripped: String = full
        .lines()
        .map(|l| l.split(',').next().unwrap().to_string() + "\n")
        .collect();
    fs::write(&features_only, stripped).unwrap();

    assert_exit(
        &run(&[
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--out",
            model.to_str().unwrap(),
            "--c",
            "2",
        ]),
        0,
    );
    let with_target = dir.path().join("p1.csv");
    let without_target = dir.path().join("p2.csv");
    assert_exit(
        &run(&[
            "predict",
            "--model",
            model.to_str().unwrap(),
            "--data",
            data.to_str().unwrap(),
            "--out",
            with_target.to_str().unwrap(),
        ]),
        0,
    );
    assert_exit(
        &run(&[
            "predict",
            "--model",
            model.to_str().unwrap(),
            "--data",
            features_only.to_str().unwrap(),
            "--out",
            without_target.to_str().unwrap(),
        ]),
        0,
    );
    assert_eq!(
        fs::read(&with_target).unwrap(),
        fs::read(&without_target).unwrap(),
        "dropping the target column must not change predictions"
    );
}

#[test]
fn mape_fit_on_zero_target_exits_2_naming_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("zero.csv");
    fs::write(&data, "x,y\n0.1,1.0\n0.2,0.0\n0.3,1.5\n").unwrap();
    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("m.txt").to_str().unwrap(),
        "--c",
        "1",
        "--loss",
        "mape",
    ]);
    assert_exit(&out, 2);
    let stderr = stderr_of(&out);
    assert!(
        stderr.contains("row 1"),
        "must name the offending row: {stderr}"
    );
}

#[test]
fn fit_without_c_echoes_the_cross_validated_choice() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sine.csv");
    sine_csv(&data, 20);
    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("m.txt").to_str().unwrap(),
        "--c-grid",
        "0.5,5",
        "--folds",
        "4",
    ]);
    assert_exit(&out, 0);
    let stdout = stdout_of(&out);
    assert!(stdout.contains("cross-validated C = "), "{stdout}");
    assert!(stdout.contains("2 candidates, 4 folds"), "{stdout}");
}

#[test]
fn nonconverged_fit_exits_1_but_still_writes_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sine.csv");
    let model = dir.path().join("m.txt");
    sine_csv(&data, 24);
    let out = run(&[
        "fit",
        "--data",
        data.to_str().unwrap(),
        "--out",
        model.to_str().unwrap(),
        "--c",
        "100",
        "--max-iter",
        "1",
        "--tol",
        "1e-12",
    ]);
    assert_exit(&out, 1);
    assert!(stdout_of(&out).contains("converged = false"));
    assert!(stderr_of(&out).contains("did not converge"));
    assert!(model.is_file(), "artifact must be kept for inspection");
    // The artifact is loadable and usable despite the failed convergence.
    let loaded: mape_core::TrainedModel64 =
        mape_core::model_io::load_model_from_path(&model).unwrap();
    assert!(!loaded.diagnostics().converged);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sine.csv");
    sine_csv(&data, 12);
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# shared settings\nloss=mae\nkernel=linear\ndata={}\nc=3\n",
            data.display()
        ),
    )
    .unwrap();

    let from_cfg = run(&[
        "fit",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("m1.txt").to_str().unwrap(),
    ]);
    assert_exit(&from_cfg, 0);
    assert!(stdout_of(&from_cfg).contains("loss = mae"));

    let overridden = run(&[
        "fit",
        "--config",
        cfg.to_str().unwrap(),
        "--loss",
        "mape",
        "--kernel",
        "gaussian",
        "--gamma",
        "2",
        "--out",
        dir.path().join("m2.txt").to_str().unwrap(),
    ]);
    assert_exit(&overridden, 0);
    assert!(stdout_of(&overridden).contains("loss = mape"));
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "lossy=mape\n").unwrap();
    let out = run(&["fit", "--config", cfg.to_str().unwrap(), "--c", "1"]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("unknown key `lossy`"));
}

#[test]
fn flag_conflicts_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sine.csv");
    sine_csv(&data, 12);
    let d = data.to_str().unwrap();
    let m = dir.path().join("m.txt");
    let m = m.to_str().unwrap();

    let tau = run(&["fit", "--data", d, "--out", m, "--c", "1", "--tau", "0.3"]);
    assert_exit(&tau, 2);
    assert!(stderr_of(&tau).contains("--tau only applies"));

    let gamma = run(&[
        "fit", "--data", d, "--out", m, "--c", "1", "--kernel", "linear", "--gamma", "2",
    ]);
    assert_exit(&gamma, 2);
    assert!(stderr_of(&gamma).contains("--gamma only applies"));

    let missing = run(&["fit", "--out", m, "--c", "1"]);
    assert_exit(&missing, 2);
    assert!(stderr_of(&missing).contains("missing --data"));
}

#[test]
fn cross_validate_prints_the_grid_and_best_c() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sine.csv");
    sine_csv(&data, 20);
    let out = run(&[
        "cross-validate",
        "--data",
        data.to_str().unwrap(),
        "--c-grid",
        "0.5,5",
        "--folds",
        "4",
        "--seed",
        "7",
    ]);
    assert_exit(&out, 0);
    let stdout = stdout_of(&out);
    assert!(stdout.contains("mean validation risk"), "{stdout}");
    assert!(
        stdout.lines().any(|l| l.trim_start().starts_with("0.5")),
        "{stdout}"
    );
    assert!(
        stdout.lines().last().unwrap().starts_with("best C = "),
        "{stdout}"
    );
}

#[test]
fn corrupt_model_file_exits_2_naming_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("sine.csv");
    let model = dir.path().join("m.txt");
    sine_csv(&data, 12);
    assert_exit(
        &run(&[
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--out",
            model.to_str().unwrap(),
            "--c",
            "1",
        ]),
        0,
    );
    let mut text = fs::read_to_string(&model).unwrap();
    text = text.replacen("intercept=", "intrcept=", 1);
    fs::write(&model, text).unwrap();
    let out = run(&[
        "predict",
        "--model",
        model.to_str().unwrap(),
        "--data",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("p.csv").to_str().unwrap(),
    ]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("line"), "{}", stderr_of(&out));
}

#[test]
fn diagnose_linear_tail_diverges_with_the_harmonic_sum() {
    let out = run(&["diagnose", "--tail", "linear", "--k", "1000"]);
    assert_exit(&out, 0);
    let stdout = stdout_of(&out);
    assert!(stdout.contains("verdict: LikelyDivergent"), "{stdout}");

    // "positive side: final partial sum S(1000) = 6.486470e0, …"
    let sum_line = stdout
        .lines()
        .find(|l| l.starts_with("positive side: final partial sum"))
        .expect("partial-sum line");
    let value: f64 = sum_line
        .split("= ")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .expect("numeric partial sum");
    assert!(
        (value - 6.4863).abs() <= 1e-3,
        "harmonic partial sum, got {value}"
    );
}

#[test]
fn diagnose_quadratic_tail_is_finite() {
    let out = run(&["diagnose", "--tail", "quadratic", "--k", "1000"]);
    assert_exit(&out, 0);
    assert!(stdout_of(&out).contains("verdict: Finite"));
}

#[test]
fn diagnose_k_zero_is_an_input_error() {
    let out = run(&["diagnose", "--tail", "linear", "--k", "0"]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("at least 1"));
}

#[test]
fn diagnose_mass_at_zero_dominates() {
    let out = run(&[
        "diagnose",
        "--tail",
        "quadratic",
        "--k",
        "100",
        "--mass-at-zero",
        "0.25",
    ]);
    assert_exit(&out, 0);
    assert!(stdout_of(&out).contains("verdict: ZeroMass"));
}

#[test]
fn diagnose_csv_tails() {
    let dir = tempfile::tempdir().unwrap();

    // A two-sided table: quadratic positive tail, vanishing negative tail.
    let good = dir.path().join("good.csv");
    let mut body = String::from("k,f_pos,f_neg\n");
    for k in 1..=101u32 {
        let eps = 1.0 / f64::from(k);
        body.push_str(&format!("{k},{:.17e},0.0\n", eps * eps));
    }
    fs::write(&good, &body).unwrap();
    let out = run(&[
        "diagnose",
        "--tail",
        &format!("csv:{}", good.display()),
        "--k",
        "100",
    ]);
    assert_exit(&out, 0);
    assert!(
        stdout_of(&out).contains("verdict: Finite"),
        "{}",
        stdout_of(&out)
    );

    // Non-monotone tail cdf: mass in (1/3, 1/2] is negative.
    let bad = dir.path().join("bad.csv");
    fs::write(
        &bad,
        "k,f_pos,f_neg\n1,0.5,0.0\n2,0.1,0.0\n3,0.3,0.0\n4,0.05,0.0\n",
    )
    .unwrap();
    let out = run(&[
        "diagnose",
        "--tail",
        &format!("csv:{}", bad.display()),
        "--k",
        "3",
    ]);
    assert_exit(&out, 2);
    let stderr = stderr_of(&out);
    assert!(stderr.contains("not monotone"), "{stderr}");
    assert!(stderr.contains("bad.csv"), "{stderr}");

    // Junk field.
    let junk = dir.path().join("junk.csv");
    fs::write(&junk, "k,f_pos,f_neg\n1,half,0.0\n2,0.1,0.0\n").unwrap();
    let out = run(&[
        "diagnose",
        "--tail",
        &format!("csv:{}", junk.display()),
        "--k",
        "1",
    ]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("cannot parse `half`"));

    // Too few rows for the requested K.
    let short = dir.path().join("short.csv");
    fs::write(&short, "k,f_pos,f_neg\n1,0.5,0.0\n").unwrap();
    let out = run(&[
        "diagnose",
        "--tail",
        &format!("csv:{}", short.display()),
        "--k",
        "5",
    ]);
    assert_exit(&out, 2);
    assert!(stderr_of(&out).contains("needs rows for k = 1..=6"));
}

#[test]
fn simulate_smoke_mode_finishes_under_ten_seconds() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("results");
    let started = Instant::now();
    let out = run(&[
        "simulate",
        "--n-train",
        "100",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    let elapsed = started.elapsed();
    assert_exit(&out, 0);
    assert!(elapsed.as_secs_f64() < 10.0, "smoke mode took {elapsed:?}");

    let report = fs::read_to_string(out_dir.join("report.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 11, "header + 10 default rows:\n{report}");
    assert_eq!(lines[0], "a,mape_mae_pct,mape_mape_pct,c_mae,c_mape,status");
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")), "{report}");
    // One curve file per row, 512 samples each.
    let curve = fs::read_to_string(out_dir.join("curve_a0.1.csv")).unwrap();
    assert_eq!(curve.lines().count(), 513);
    assert_eq!(fs::read_dir(&out_dir).unwrap().count(), 11);
}

#[test]
fn simulate_single_row_and_seed_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "simulate".to_string(),
            "--a-list".into(),
            "1".into(),
            "--n-train".into(),
            "60".into(),
            "--n-test".into(),
            "60".into(),
            "--folds".into(),
            "3".into(),
            "--c-grid".into(),
            "0.5,5".into(),
            "--seed".into(),
            "7".into(),
            "--out-dir".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let d1 = dir.path().join("r1");
    let d2 = dir.path().join("r2");
    let out1 = mape_bin().args(args(&d1)).output().unwrap();
    assert_exit(&out1, 0);
    let out2 = mape_bin().args(args(&d2)).output().unwrap();
    assert_exit(&out2, 0);

    assert_eq!(
        fs::read(d1.join("report.csv")).unwrap(),
        fs::read(d2.join("report.csv")).unwrap(),
        "reports must be byte-identical"
    );
    assert_eq!(
        fs::read(d1.join("curve_a1.csv")).unwrap(),
        fs::read(d2.join("curve_a1.csv")).unwrap(),
        "curves must be byte-identical"
    );
    // The run's stdout carries a timing line, which legitimately varies;
    // the table itself must match.
    let table = |o: &Output| {
        stdout_of(o)
            .lines()
            .take_while(|l| !l.starts_with("report:"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(table(&out1), table(&out2));
}

#[test]
fn simulate_rejects_unwritable_out_dir_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker.txt");
    fs::write(&blocker, "not a directory").unwrap();
    let impossible = blocker.join("sub");

    let started = Instant::now();
    // A huge n_train proves validation happens before any computation.
    let out = run(&[
        "simulate",
        "--n-train",
        "5000000",
        "--out-dir",
        impossible.to_str().unwrap(),
    ]);
    assert_exit(&out, 2);
    assert!(
        started.elapsed().as_secs_f64() < 5.0,
        "must fail before computing"
    );
    assert!(
        stderr_of(&out).contains("output directory") || stderr_of(&out).contains("cannot create")
    );
}

#[test]
fn simulate_validates_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("r");
    let bad_folds = run(&[
        "simulate",
        "--a-list",
        "1",
        "--folds",
        "1",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&bad_folds, 2);

    let bad_list = run(&[
        "simulate",
        "--a-list",
        "1,x",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_exit(&bad_list, 2);
    assert!(stderr_of(&bad_list).contains("--a-list"));
}
