//! Model persistence: a flat, human-inspectable text format.
//!
//! Layout (line numbers are 1-based and fixed):
//!
//! ```text
//! mape-model v1
//! n=<rows> d=<features> weighted=<true|false>
//! x0,...,x{d-1},alpha[,weight]          ← CSV column header
//! <n data rows of comma-separated floats>
//! intercept=<float>
//! kernel=gaussian gamma=<float>         ← or: kernel=linear
//! loss=<mape|mae|pinball> tau=<float>
//! c=<float>
//! converged=<true|false>
//! iterations=<integer>
//! max_kkt_violation=<float>
//! objective=<float>
//! psd_warning=<true|false>
//! end
//! ```
//!
//! Every float is written as `{:.16e}` — 17 significant decimal digits,
//! which round-trip IEEE doubles **bit-exactly** (and, a fortiori, single
//! precision). Loading re-validates the structural invariants through
//! [`TrainedModel::from_parts`], so a hand-edited file that breaks them
//! (e.g. Σα ≠ 0) is rejected. Parse failures name the offending line.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::loss::{LossKind, LossSpec};
use crate::regressor::{FitDiagnostics, TrainedModel};
use crate::scalar::{lit, Scalar};

/// First line of every model file.
const MAGIC: &str = "mape-model v1";

fn fmt_float<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v.to_f64().expect("floats widen to f64"))
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::ModelParse {
        line,
        message: message.into(),
    }
}

fn parse_float<T: Scalar>(field: &str, line: usize) -> Result<T> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| parse_error(line, format!("expected a number, got `{field}`")))?;
    Ok(lit::<T>(v))
}

fn parse_bool(field: &str, line: usize) -> Result<bool> {
    match field.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(parse_error(
            line,
            format!("expected true or false, got `{other}`"),
        )),
    }
}

fn parse_usize(field: &str, line: usize) -> Result<usize> {
    field.trim().parse().map_err(|_| {
        parse_error(
            line,
            format!("expected a nonnegative integer, got `{field}`"),
        )
    })
}

/// Serialize a model into `writer` in the v1 text format.
pub fn save_model<T: Scalar, W: Write>(model: &TrainedModel<T>, mut writer: W) -> Result<()> {
    let n = model.alpha().len();
    let d = model.dim();
    let pts = model.support_points();
    let weights = model.loss().sample_weights();

    writeln!(writer, "{MAGIC}")?;
    writeln!(writer, "n={n} d={d} weighted={}", weights.is_some())?;
    let mut columns: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    columns.push("alpha".to_string());
    if weights.is_some() {
        columns.push("weight".to_string());
    }
    writeln!(writer, "{}", columns.join(","))?;
    for i in 0..n {
        let mut fields: Vec<String> = (0..d).map(|j| fmt_float(pts[[i, j]])).collect();
        fields.push(fmt_float(model.alpha()[i]));
        if let Some(w) = weights {
            fields.push(fmt_float(w[i]));
        }
        writeln!(writer, "{}", fields.join(","))?;
    }
    writeln!(writer, "intercept={}", fmt_float(model.intercept()))?;
    match model.kernel() {
        KernelSpec::Gaussian { gamma } => {
            writeln!(writer, "kernel=gaussian gamma={}", fmt_float(*gamma))?;
        }
        KernelSpec::Linear => writeln!(writer, "kernel=linear")?,
    }
    writeln!(
        writer,
        "loss={} tau={}",
        model.loss().kind().name(),
        fmt_float(model.loss().tau())
    )?;
    writeln!(writer, "c={}", fmt_float(model.regularization_c()))?;
    let diag = model.diagnostics();
    writeln!(writer, "converged={}", diag.converged)?;
    writeln!(writer, "iterations={}", diag.iterations)?;
    writeln!(
        writer,
        "max_kkt_violation={}",
        fmt_float(diag.max_kkt_violation)
    )?;
    writeln!(writer, "objective={}", fmt_float(diag.objective))?;
    writeln!(writer, "psd_warning={}", diag.psd_warning)?;
    writeln!(writer, "end")?;
    Ok(())
}

/// Serialize a model to a file (buffered; created or truncated).
pub fn save_model_to_path<T: Scalar, P: AsRef<Path>>(
    model: &TrainedModel<T>,
    path: P,
) -> Result<()> {
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    save_model(model, &mut writer)?;
    writer.flush()?;
    Ok(())
}

/// Fetch line `idx` (0-based) or fail naming the 1-based line number.
fn line_at<'a>(lines: &'a [&'a str], idx: usize, what: &str) -> Result<&'a str> {
    lines
        .get(idx)
        .copied()
        .ok_or_else(|| parse_error(idx + 1, format!("file ends early; expected {what}")))
}

/// Parse `key=value` at line `idx`, returning the value.
fn keyed<'a>(lines: &'a [&'a str], idx: usize, key: &str) -> Result<&'a str> {
    let line = line_at(lines, idx, &format!("`{key}=<value>`"))?;
    match line.split_once('=') {
        Some((k, v)) if k == key => Ok(v),
        _ => Err(parse_error(
            idx + 1,
            format!("expected `{key}=<value>`, got `{line}`"),
        )),
    }
}

/// Deserialize a model from `reader`, validating structural invariants.
pub fn load_model<T: Scalar, R: Read>(mut reader: R) -> Result<TrainedModel<T>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let lines: Vec<&str> = text.lines().collect();

    if line_at(&lines, 0, "the magic line")? != MAGIC {
        return Err(parse_error(1, format!("expected `{MAGIC}`")));
    }

    // Line 2: dimensions.
    let dims_line = line_at(&lines, 1, "`n=<rows> d=<features> weighted=<bool>`")?;
    let mut n = None;
    let mut d = None;
    let mut weighted = None;
    for token in dims_line.split_whitespace() {
        match token.split_once('=') {
            Some(("n", v)) => n = Some(parse_usize(v, 2)?),
            Some(("d", v)) => d = Some(parse_usize(v, 2)?),
            Some(("weighted", v)) => weighted = Some(parse_bool(v, 2)?),
            _ => return Err(parse_error(2, format!("unexpected token `{token}`"))),
        }
    }
    let (n, d, weighted) = match (n, d, weighted) {
        (Some(n), Some(d), Some(w)) => (n, d, w),
        _ => {
            return Err(parse_error(
                2,
                format!("expected `n=<rows> d=<features> weighted=<bool>`, got `{dims_line}`"),
            ))
        }
    };
    if n == 0 || d == 0 {
        return Err(parse_error(
            2,
            format!("n and d must be positive, got n={n} d={d}"),
        ));
    }

    // Line 3: column header.
    let mut expected_cols: Vec<String> = (0..d).map(|j| format!("x{j}")).collect();
    expected_cols.push("alpha".to_string());
    if weighted {
        expected_cols.push("weight".to_string());
    }
    let expected_header = expected_cols.join(",");
    let header = line_at(&lines, 2, "the column header")?;
    if header != expected_header {
        return Err(parse_error(
            3,
            format!("expected column header `{expected_header}`, got `{header}`"),
        ));
    }

    // Data rows.
    let fields_per_row = d + 1 + usize::from(weighted);
    let mut support_points = Array2::<T>::zeros((n, d));
    let mut alpha = Vec::with_capacity(n);
    let mut user_weights = if weighted {
        Some(Vec::with_capacity(n))
    } else {
        None
    };
    for i in 0..n {
        let lineno = 4 + i;
        let row = line_at(&lines, 3 + i, "a data row")?;
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != fields_per_row {
            return Err(parse_error(
                lineno,
                format!("expected {fields_per_row} fields, got {}", fields.len()),
            ));
        }
        for j in 0..d {
            support_points[[i, j]] = parse_float(fields[j], lineno)?;
        }
        alpha.push(parse_float::<T>(fields[d], lineno)?);
        if let Some(w) = user_weights.as_mut() {
            w.push(parse_float::<T>(fields[d + 1], lineno)?);
        }
    }

    // Footer.
    let base = 3 + n;
    let intercept = parse_float::<T>(keyed(&lines, base, "intercept")?, base + 1)?;

    let kernel_value = keyed(&lines, base + 1, "kernel")?;
    let kernel = match kernel_value.split_once(' ') {
        None if kernel_value == "linear" => KernelSpec::Linear,
        Some(("gaussian", rest)) => match rest.split_once('=') {
            Some(("gamma", v)) => KernelSpec::gaussian(parse_float::<T>(v, base + 2)?)
                .map_err(|e| parse_error(base + 2, e.to_string()))?,
            _ => {
                return Err(parse_error(
                    base + 2,
                    format!("expected `gaussian gamma=<float>`, got `{kernel_value}`"),
                ))
            }
        },
        _ => {
            return Err(parse_error(
                base + 2,
                format!("unknown kernel `{kernel_value}`"),
            ))
        }
    };

    let loss_value = keyed(&lines, base + 2, "loss")?;
    let (loss_name, tau_part) = loss_value.split_once(' ').ok_or_else(|| {
        parse_error(
            base + 3,
            format!("expected `<name> tau=<float>`, got `{loss_value}`"),
        )
    })?;
    let tau = match tau_part.split_once('=') {
        Some(("tau", v)) => parse_float::<T>(v, base + 3)?,
        _ => {
            return Err(parse_error(
                base + 3,
                format!("expected `tau=<float>`, got `{tau_part}`"),
            ))
        }
    };
    let kind = LossKind::parse(loss_name).map_err(|e| parse_error(base + 3, e.to_string()))?;
    let half = lit::<T>(0.5);
    let loss = match kind {
        LossKind::Mape | LossKind::Mae => {
            if tau != half {
                return Err(parse_error(
                    base + 3,
                    format!("{loss_name} implies tau=0.5, got {tau}"),
                ));
            }
            if kind == LossKind::Mape {
                LossSpec::mape()
            } else {
                LossSpec::mae()
            }
        }
        LossKind::Pinball => {
            LossSpec::pinball(tau).map_err(|e| parse_error(base + 3, e.to_string()))?
        }
    };
    let loss = match user_weights {
        Some(w) => loss
            .with_sample_weights(w)
            .map_err(|e| parse_error(4, e.to_string()))?,
        None => loss,
    };

    let c = parse_float::<T>(keyed(&lines, base + 3, "c")?, base + 4)?;
    let converged = parse_bool(keyed(&lines, base + 4, "converged")?, base + 5)?;
    let iterations = parse_usize(keyed(&lines, base + 5, "iterations")?, base + 6)?;
    let max_kkt_violation =
        parse_float::<T>(keyed(&lines, base + 6, "max_kkt_violation")?, base + 7)?;
    let objective = parse_float::<T>(keyed(&lines, base + 7, "objective")?, base + 8)?;
    let psd_warning = parse_bool(keyed(&lines, base + 8, "psd_warning")?, base + 9)?;

    let end_line = line_at(&lines, base + 9, "`end`")?;
    if end_line != "end" {
        return Err(parse_error(
            base + 10,
            format!("expected `end`, got `{end_line}`"),
        ));
    }
    if let Some(extra) = lines.get(base + 10) {
        if !extra.trim().is_empty() {
            return Err(parse_error(
                base + 11,
                format!("unexpected content after `end`: `{extra}`"),
            ));
        }
    }

    TrainedModel::from_parts(
        support_points,
        alpha,
        intercept,
        kernel,
        loss,
        c,
        FitDiagnostics {
            converged,
            iterations,
            max_kkt_violation,
            objective,
            psd_warning,
        },
    )
}

/// Deserialize a model from a file.
pub fn load_model_from_path<T: Scalar, P: AsRef<Path>>(path: P) -> Result<TrainedModel<T>> {
    let file = File::open(path)?;
    load_model(io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regressor::{fit, Dataset};
    use crate::rng::SplitMix64;
    use ndarray::array;

    fn fitted(loss: LossSpec<f64>, kernel: KernelSpec<f64>) -> TrainedModel<f64> {
        let mut rng = SplitMix64::new(77);
        let n = 14;
        let mut x = Array2::<f64>::zeros((n, 2));
        let mut y = Vec::with_capacity(n);
        for i in 0..n {
            x[[i, 0]] = rng.uniform(-1.0, 1.0);
            x[[i, 1]] = rng.uniform(-1.0, 1.0);
            y.push(2.0 + x[[i, 0]] - 0.5 * x[[i, 1]] + 0.05 * rng.normal());
        }
        let data = Dataset::new(x, y).unwrap();
        fit(&data, loss, kernel, 3.0).unwrap()
    }

    fn assert_models_bit_equal(a: &TrainedModel<f64>, b: &TrainedModel<f64>) {
        assert_eq!(a.alpha().len(), b.alpha().len());
        for (x, y) in a.alpha().iter().zip(b.alpha().iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a.support_points().iter().zip(b.support_points().iter()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(a.intercept().to_bits(), b.intercept().to_bits());
        assert_eq!(
            a.regularization_c().to_bits(),
            b.regularization_c().to_bits()
        );
        assert_eq!(a.loss().kind(), b.loss().kind());
        assert_eq!(a.loss().tau().to_bits(), b.loss().tau().to_bits());
        match (a.loss().sample_weights(), b.loss().sample_weights()) {
            (None, None) => {}
            (Some(wa), Some(wb)) => {
                for (x, y) in wa.iter().zip(wb.iter()) {
                    assert_eq!(x.to_bits(), y.to_bits());
                }
            }
            _ => panic!("weight presence differs"),
        }
        match (a.kernel(), b.kernel()) {
            (KernelSpec::Linear, KernelSpec::Linear) => {}
            (KernelSpec::Gaussian { gamma: ga }, KernelSpec::Gaussian { gamma: gb }) => {
                assert_eq!(ga.to_bits(), gb.to_bits());
            }
            _ => panic!("kernel kind differs"),
        }
        assert_eq!(a.diagnostics().converged, b.diagnostics().converged);
        assert_eq!(a.diagnostics().iterations, b.diagnostics().iterations);
        assert_eq!(
            a.diagnostics().max_kkt_violation.to_bits(),
            b.diagnostics().max_kkt_violation.to_bits()
        );
        assert_eq!(
            a.diagnostics().objective.to_bits(),
            b.diagnostics().objective.to_bits()
        );
        assert_eq!(a.diagnostics().psd_warning, b.diagnostics().psd_warning);
    }

    fn round_trip(model: &TrainedModel<f64>) -> TrainedModel<f64> {
        let mut buf = Vec::new();
        save_model(model, &mut buf).unwrap();
        load_model(buf.as_slice()).unwrap()
    }

    #[test]
    fn mape_gaussian_round_trip_is_bit_exact() {
        let model = fitted(LossSpec::mape(), KernelSpec::gaussian(0.7).unwrap());
        let back = round_trip(&model);
        assert_models_bit_equal(&model, &back);
        // And so are predictions.
        let q = array![[0.25, -0.5], [0.0, 0.0]];
        let p1 = model.predict(q.view()).unwrap();
        let p2 = back.predict(q.view()).unwrap();
        for (a, b) in p1.iter().zip(p2.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn weighted_mae_round_trip_keeps_weights() {
        let mut rng = SplitMix64::new(3);
        let w: Vec<f64> = (0..14).map(|_| rng.uniform(0.5, 2.0)).collect();
        let model = fitted(
            LossSpec::mae().with_sample_weights(w).unwrap(),
            KernelSpec::Linear,
        );
        let back = round_trip(&model);
        assert_models_bit_equal(&model, &back);
    }

    #[test]
    fn pinball_round_trip_keeps_tau() {
        let model = fitted(
            LossSpec::pinball(0.3).unwrap(),
            KernelSpec::gaussian(1.5).unwrap(),
        );
        let back = round_trip(&model);
        assert_models_bit_equal(&model, &back);
        assert_eq!(back.loss().tau(), 0.3);
    }

    #[test]
    fn awkward_floats_survive_the_decimal_round_trip() {
        // Subnormal, negative zero, and an accumulation artifact.
        for v in [
            5e-324,
            -0.0,
            0.1 + 0.2,
            1.0 / 3.0,
            f64::MAX,
            f64::MIN_POSITIVE,
        ] {
            let text = fmt_float(v);
            let back: f64 = text.parse().unwrap();
            assert_eq!(v.to_bits(), back.to_bits(), "value {v:e} via `{text}`");
        }
    }

    #[test]
    fn save_then_load_via_path() {
        let model = fitted(LossSpec::mape(), KernelSpec::gaussian(1.0).unwrap());
        let dir = std::env::temp_dir().join("mape-core-model-io-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.txt");
        save_model_to_path(&model, &path).unwrap();
        let back: TrainedModel<f64> = load_model_from_path(&path).unwrap();
        assert_models_bit_equal(&model, &back);
        std::fs::remove_file(&path).unwrap();
    }

    #[test]
    fn bad_magic_names_line_one() {
        let err = load_model::<f64, _>("not-a-model\n".as_bytes()).unwrap_err();
        match err {
            Error::ModelParse { line, .. } => assert_eq!(line, 1),
            other => panic!("expected ModelParse, got {other:?}"),
        }
    }

    #[test]
    fn corrupt_data_row_names_its_line() {
        let model = fitted(LossSpec::mae(), KernelSpec::Linear);
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // Replace the first field of the second data row (line 5) with junk.
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let fields: Vec<&str> = lines[4].split(',').collect();
        lines[4] = format!("junk,{}", fields[1..].join(","));
        let corrupted = lines.join("\n");
        let err = load_model::<f64, _>(corrupted.as_bytes()).unwrap_err();
        match err {
            Error::ModelParse { line, message } => {
                assert_eq!(line, 5, "{message}");
                assert!(message.contains("junk"), "{message}");
            }
            other => panic!("expected ModelParse, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_reports_the_missing_line() {
        let model = fitted(LossSpec::mae(), KernelSpec::Linear);
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let truncated: String = text.lines().take(6).collect::<Vec<_>>().join("\n");
        let err = load_model::<f64, _>(truncated.as_bytes()).unwrap_err();
        match err {
            Error::ModelParse { line, .. } => assert_eq!(line, 7),
            other => panic!("expected ModelParse, got {other:?}"),
        }
    }

    #[test]
    fn missing_end_marker_is_rejected() {
        let model = fitted(LossSpec::mae(), KernelSpec::Linear);
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let without_end = text.replace("\nend\n", "\n");
        let err = load_model::<f64, _>(without_end.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ModelParse { .. }));
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let model = fitted(LossSpec::mae(), KernelSpec::Linear);
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let mut text = String::from_utf8(buf).unwrap();
        text.push_str("surprise\n");
        let err = load_model::<f64, _>(text.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::ModelParse { .. }));
    }

    #[test]
    fn edited_alpha_breaking_the_zero_sum_is_rejected() {
        let model = fitted(LossSpec::mae(), KernelSpec::Linear);
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        // Overwrite every alpha (last field on data rows 4..4+n) with 1.0.
        let n = model.alpha().len();
        for row in lines.iter_mut().skip(3).take(n) {
            let mut fields: Vec<&str> = row.split(',').collect();
            let last = fields.len() - 1;
            fields[last] = "1.0";
            *row = fields.join(",");
        }
        let broken = lines.join("\n");
        let err = load_model::<f64, _>(broken.as_bytes()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)), "{err:?}");
    }

    #[test]
    fn wrong_field_count_names_the_row() {
        let model = fitted(LossSpec::mae(), KernelSpec::Linear);
        let mut buf = Vec::new();
        save_model(&model, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        lines[3] = format!("{},0.0", lines[3]);
        let broken = lines.join("\n");
        let err = load_model::<f64, _>(broken.as_bytes()).unwrap_err();
        match err {
            Error::ModelParse { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("fields"), "{message}");
            }
            other => panic!("expected ModelParse, got {other:?}"),
        }
    }
}
