//! Fit/predict API and cross-validation: the user-facing estimators.
//!
//! [`fit`] assembles the pieces — Gram matrix from [`crate::kernel`], dual
//! box from [`crate::qp::make_bounds`] (generalized to user sample weights),
//! the SMO solve, and intercept recovery — into a [`TrainedModel`] whose
//! prediction rule is `f(x) = Σ_j α_j k(x_j, x) + b`. [`cross_validate`]
//! scores a grid of regularization constants C by k-fold validation risk
//! *in the same loss family that is being fit*: a MAPE model is selected by
//! MAPE validation risk, an MAE model by MAE risk.
//!
//! Fitting under MAPE requires targets bounded away from zero (the dual box
//! scales like `1/y²`); the `y_min` guard in [`FitOptions`] rejects such
//! data loudly instead of producing a meaningless QP.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::loss::{empirical_risk, LossKind, LossSpec};
use crate::qp::{recover_intercept, solve_dual, BoxBounds, DualSolution};
use crate::rng::SplitMix64;
use crate::scalar::{lit, Scalar};

/// Default grid of regularization constants for cross-validation:
/// `{0.01, 0.05, 0.1, 0.5, 1, 5, 10, 100, 1000, 1e4, 1e5}`.
pub fn default_c_grid<T: Scalar>() -> Vec<T> {
    [
        0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 10.0, 100.0, 1000.0, 1e4, 1e5,
    ]
    .iter()
    .map(|&c| lit::<T>(c))
    .collect()
}

/// A regression sample: features `x` (n×d) and targets `y` (length n).
#[derive(Clone, Debug)]
pub struct Dataset<T: Scalar> {
    x: Array2<T>,
    y: Vec<T>,
}

impl<T: Scalar> Dataset<T> {
    /// Validated construction: row count must match target count, at least
    /// one sample and one feature, and every entry finite.
    pub fn new(x: Array2<T>, y: Vec<T>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::InvalidInput(format!(
                "feature matrix has {} rows but there are {} targets",
                x.nrows(),
                y.len()
            )));
        }
        if y.is_empty() {
            return Err(Error::InvalidInput(
                "dataset must contain at least one sample".into(),
            ));
        }
        if x.ncols() == 0 {
            return Err(Error::InvalidInput(
                "dataset must have at least one feature column".into(),
            ));
        }
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "feature matrix contains a non-finite value {v}"
            )));
        }
        if let Some((i, &v)) = y.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "target at row {i} is not finite: {v}"
            )));
        }
        Ok(Dataset { x, y })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.y.len()
    }

    /// True when the dataset holds no samples (never after construction).
    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Feature dimension d.
    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Feature matrix view.
    pub fn x(&self) -> ArrayView2<'_, T> {
        self.x.view()
    }

    /// Targets.
    pub fn y(&self) -> &[T] {
        &self.y
    }
}

/// Solver and guard settings for [`fit_with_options`].
#[derive(Clone, Copy, Debug)]
pub struct FitOptions<T: Scalar> {
    /// KKT-gap stopping tolerance for the dual solve. Default `1e-6`.
    pub tol: T,
    /// Pairwise-update budget; `None` means the default `100·n²`.
    pub max_iter: Option<usize>,
    /// MAPE guard: fitting rejects any `|y_i| < y_min`. Default `1e-8`.
    pub y_min: T,
}

impl<T: Scalar> Default for FitOptions<T> {
    fn default() -> Self {
        FitOptions {
            tol: lit::<T>(1e-6),
            max_iter: None,
            y_min: lit::<T>(1e-8),
        }
    }
}

/// Convergence metadata carried by a trained model.
#[derive(Clone, Copy, Debug)]
pub struct FitDiagnostics<T: Scalar> {
    /// Whether the dual solve reached its tolerance within budget.
    pub converged: bool,
    /// Pairwise updates spent.
    pub iterations: usize,
    /// KKT gap at termination (0 certifies optimality up to tolerance).
    pub max_kkt_violation: T,
    /// Final dual objective.
    pub objective: T,
    /// True when the Gram matrix showed negative pairwise curvature.
    pub psd_warning: bool,
}

/// A fitted kernel regression model.
///
/// Immutable once constructed; prediction is reentrant.
#[derive(Clone, Debug)]
pub struct TrainedModel<T: Scalar> {
    support_points: Array2<T>,
    alpha: Vec<T>,
    intercept: T,
    kernel: KernelSpec<T>,
    loss: LossSpec<T>,
    regularization_c: T,
    diagnostics: FitDiagnostics<T>,
}

impl<T: Scalar> TrainedModel<T> {
    /// Reassemble a model from stored parts (the persistence path).
    ///
    /// Validates the structural invariants: α must have one coefficient per
    /// support point, sum to zero within `1e-9·(Σ|α| + 1)`, and be finite;
    /// C must be positive.
    pub fn from_parts(
        support_points: Array2<T>,
        alpha: Vec<T>,
        intercept: T,
        kernel: KernelSpec<T>,
        loss: LossSpec<T>,
        regularization_c: T,
        diagnostics: FitDiagnostics<T>,
    ) -> Result<Self> {
        if support_points.nrows() != alpha.len() {
            return Err(Error::InvalidInput(format!(
                "{} support points but {} dual coefficients",
                support_points.nrows(),
                alpha.len()
            )));
        }
        if alpha.is_empty() {
            return Err(Error::InvalidInput(
                "a model needs at least one support point".into(),
            ));
        }
        if !(regularization_c.is_finite() && regularization_c > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "regularization constant C must be positive and finite, got {regularization_c}"
            )));
        }
        if !intercept.is_finite() {
            return Err(Error::InvalidInput(format!(
                "intercept must be finite, got {intercept}"
            )));
        }
        let mut sum = T::zero();
        let mut abs_sum = T::zero();
        for (i, &a) in alpha.iter().enumerate() {
            if !a.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "dual coefficient at row {i} is not finite: {a}"
                )));
            }
            sum = sum + a;
            abs_sum = abs_sum + a.abs();
        }
        if sum.abs() > lit::<T>(1e-9) * (abs_sum + T::one()) {
            return Err(Error::InvalidInput(format!(
                "dual coefficients must sum to zero, got {sum}"
            )));
        }
        Ok(TrainedModel {
            support_points,
            alpha,
            intercept,
            kernel,
            loss,
            regularization_c,
            diagnostics,
        })
    }

    /// Training inputs the expansion is anchored on (n×d).
    pub fn support_points(&self) -> ArrayView2<'_, T> {
        self.support_points.view()
    }

    /// Dual coefficients α.
    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    /// Bias term b.
    pub fn intercept(&self) -> T {
        self.intercept
    }

    /// Kernel the model was trained with.
    pub fn kernel(&self) -> &KernelSpec<T> {
        &self.kernel
    }

    /// Loss the model was trained under.
    pub fn loss(&self) -> &LossSpec<T> {
        &self.loss
    }

    /// Regularization constant C.
    pub fn regularization_c(&self) -> T {
        self.regularization_c
    }

    /// Convergence metadata from the fit.
    pub fn diagnostics(&self) -> &FitDiagnostics<T> {
        &self.diagnostics
    }

    /// Feature dimension d expected by [`TrainedModel::predict`].
    pub fn dim(&self) -> usize {
        self.support_points.ncols()
    }

    /// Predict `f(x) = Σ_j α_j k(x_j, x) + b` for each row of `x`.
    ///
    /// Errors when the feature dimension differs from training.
    pub fn predict(&self, x: ArrayView2<'_, T>) -> Result<Vec<T>> {
        if x.ncols() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "prediction input has {} features but the model was trained with {}",
                x.ncols(),
                self.dim()
            )));
        }
        let cross = self.kernel.cross_matrix(x, self.support_points.view())?;
        let mut out = Vec::with_capacity(x.nrows());
        for row in cross.axis_iter(Axis(0)) {
            let mut acc = T::zero();
            for (&kij, &aj) in row.iter().zip(self.alpha.iter()) {
                acc = acc + kij * aj;
            }
            out.push(acc + self.intercept);
        }
        Ok(out)
    }
}

/// Free-function form of [`TrainedModel::predict`].
pub fn predict<T: Scalar>(model: &TrainedModel<T>, x: ArrayView2<'_, T>) -> Result<Vec<T>> {
    model.predict(x)
}

/// Per-sample dual weights for a loss: the structural factor (`1/y_i²` for
/// MAPE, `1` otherwise) times any user sample weight. These scale the dual
/// box, the intercept-recovery quantile, and the balance condition alike.
fn effective_dual_weights<T: Scalar>(loss: &LossSpec<T>, y: &[T]) -> Result<Vec<T>> {
    let mut weights = Vec::with_capacity(y.len());
    for (i, &yi) in y.iter().enumerate() {
        let structural = match loss.kind() {
            LossKind::Mape => {
                if yi == T::zero() {
                    return Err(Error::InvalidInput(format!(
                        "MAPE dual weights are undefined for target 0 at row {i}"
                    )));
                }
                T::one() / (yi * yi)
            }
            LossKind::Mae | LossKind::Pinball => T::one(),
        };
        let w = match loss.sample_weights() {
            Some(user) => structural * user[i],
            None => structural,
        };
        weights.push(w);
    }
    Ok(weights)
}

/// Reject MAPE fitting when any `|y_i| < y_min`.
fn check_y_min<T: Scalar>(y: &[T], y_min: T) -> Result<()> {
    if !(y_min.is_finite() && y_min >= T::zero()) {
        return Err(Error::InvalidInput(format!(
            "y_min guard must be nonnegative and finite, got {y_min}"
        )));
    }
    for (i, &yi) in y.iter().enumerate() {
        if yi.abs() < y_min {
            return Err(Error::TargetNearZero {
                index: i,
                value: yi.to_f64().unwrap_or(f64::NAN),
                y_min: y_min.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// One dual solve over a precomputed Gram matrix, plus intercept recovery.
/// Shared by [`fit_with_options`] and the cross-validation cells.
fn solve_on_gram<T: Scalar>(
    gram: ArrayView2<'_, T>,
    y: &[T],
    weights: &[T],
    tau: T,
    c: T,
    tol: T,
    max_iter: usize,
) -> Result<(DualSolution<T>, T)> {
    let bounds = BoxBounds::from_weights(weights, c, tau)?;
    let solution = solve_dual(gram, y, &bounds, tol, max_iter)?;
    let intercept = recover_intercept(&solution.alpha, gram, y, &bounds, tau, weights)?;
    Ok((solution, intercept))
}

/// Fit with default options (tol `1e-6`, budget `100·n²`, y_min `1e-8`).
pub fn fit<T: Scalar>(
    data: &Dataset<T>,
    loss: LossSpec<T>,
    kernel: KernelSpec<T>,
    c: T,
) -> Result<TrainedModel<T>> {
    fit_with_options(data, loss, kernel, c, FitOptions::default())
}

/// Fit a kernel regression model under explicit solver settings.
///
/// Requires n ≥ 2 samples (the equality constraint pins a single sample's
/// α to zero, making the fit a constant — rejected as almost certainly a
/// mistake). MAPE fitting additionally requires every `|y_i| ≥ y_min`.
/// Non-convergence within the budget is *not* an error: it is reported in
/// [`FitDiagnostics`].
pub fn fit_with_options<T: Scalar>(
    data: &Dataset<T>,
    loss: LossSpec<T>,
    kernel: KernelSpec<T>,
    c: T,
    options: FitOptions<T>,
) -> Result<TrainedModel<T>> {
    let n = data.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "fitting requires at least 2 samples, got {n}"
        )));
    }
    if let Some(w) = loss.sample_weights() {
        if w.len() != n {
            return Err(Error::InvalidInput(format!(
                "loss carries {} sample weights but the dataset has {n} samples",
                w.len()
            )));
        }
    }
    if loss.kind() == LossKind::Mape {
        check_y_min(data.y(), options.y_min)?;
    }
    let weights = effective_dual_weights(&loss, data.y())?;
    let gram = kernel.gram_matrix(data.x());
    let max_iter = options.max_iter.unwrap_or(100 * n * n);
    let (solution, intercept) = solve_on_gram(
        gram.view(),
        data.y(),
        &weights,
        loss.tau(),
        c,
        options.tol,
        max_iter,
    )?;
    Ok(TrainedModel {
        support_points: data.x.clone(),
        alpha: solution.alpha,
        intercept,
        kernel,
        loss,
        regularization_c: c,
        diagnostics: FitDiagnostics {
            converged: solution.converged,
            iterations: solution.iterations,
            max_kkt_violation: solution.max_kkt_violation,
            objective: solution.objective,
            psd_warning: solution.psd_warning,
        },
    })
}

/// Cross-validation outcome over a C grid.
#[derive(Clone, Debug)]
pub struct CvReport<T: Scalar> {
    /// The evaluated grid: input order with exact duplicates removed
    /// (first occurrence kept).
    pub grid: Vec<T>,
    /// Validation risks, one row per grid entry, one column per fold.
    pub fold_scores: Array2<T>,
    /// Grid value with the smallest mean validation risk; exact ties go to
    /// the smaller C.
    pub best_c: T,
    /// Number of folds.
    pub folds: usize,
    /// Seed that determined the fold assignment.
    pub seed: u64,
}

/// K-fold cross-validation with the library's default solver settings.
///
/// See [`cross_validate_with_options`]; this uses [`FitOptions::default`].
pub fn cross_validate<T: Scalar>(
    data: &Dataset<T>,
    loss: &LossSpec<T>,
    kernel: &KernelSpec<T>,
    c_grid: &[T],
    folds: usize,
    seed: u64,
) -> Result<CvReport<T>> {
    cross_validate_with_options(
        data,
        loss,
        kernel,
        c_grid,
        folds,
        seed,
        FitOptions::default(),
    )
}

/// K-fold cross-validation of the regularization constant C.
///
/// Folds are assigned deterministically from `seed`: indices `0..n` are
/// shuffled by the pinned PRNG and split contiguously, the first `n mod
/// folds` folds taking one extra sample. Every grid value is fitted on each
/// fold's training part and scored by **empirical risk under `loss`
/// itself** on the held-out part — a MAPE model is selected by MAPE, an MAE
/// model by MAE. `best_c` minimizes the mean fold score; exact ties break
/// toward the smaller C, and non-finite means (e.g. a validation target of
/// zero under MAPE) order after every finite one.
///
/// The full Gram matrix is computed once and sliced per fold. Solver
/// settings (including non-convergence handling) follow `options`; a cell
/// that fails to converge is scored like any other fit.
pub fn cross_validate_with_options<T: Scalar>(
    data: &Dataset<T>,
    loss: &LossSpec<T>,
    kernel: &KernelSpec<T>,
    c_grid: &[T],
    folds: usize,
    seed: u64,
    options: FitOptions<T>,
) -> Result<CvReport<T>> {
    let n = data.len();
    if folds < 2 {
        return Err(Error::InvalidInput(format!(
            "cross-validation requires at least 2 folds, got {folds}"
        )));
    }
    if n < folds {
        return Err(Error::InvalidInput(format!(
            "cross-validation requires at least as many samples as folds, got {n} samples for {folds} folds"
        )));
    }
    if c_grid.is_empty() {
        return Err(Error::InvalidInput(
            "cross-validation grid must be non-empty".into(),
        ));
    }
    for &c in c_grid {
        if !(c.is_finite() && c > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "grid values must be positive and finite, got {c}"
            )));
        }
    }
    if let Some(w) = loss.sample_weights() {
        if w.len() != n {
            return Err(Error::InvalidInput(format!(
                "loss carries {} sample weights but the dataset has {n} samples",
                w.len()
            )));
        }
    }
    if loss.kind() == LossKind::Mape {
        check_y_min(data.y(), options.y_min)?;
    }

    // Deduplicate (exact equality), preserving first occurrences.
    let mut grid: Vec<T> = Vec::with_capacity(c_grid.len());
    for &c in c_grid {
        if !grid.contains(&c) {
            grid.push(c);
        }
    }

    // Deterministic fold assignment.
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut order);
    let base = n / folds;
    let extra = n % folds;
    let mut fold_indices: Vec<Vec<usize>> = Vec::with_capacity(folds);
    let mut cursor = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        fold_indices.push(order[cursor..cursor + size].to_vec());
        cursor += size;
    }

    let full_gram = kernel.gram_matrix(data.x());
    let all_weights = effective_dual_weights(loss, data.y())?;
    let mut fold_scores = Array2::<T>::zeros((grid.len(), folds));

    for (f, val_idx) in fold_indices.iter().enumerate() {
        let train_idx: Vec<usize> = fold_indices
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        let nt = train_idx.len();

        // Slice the once-computed Gram matrix and per-sample vectors.
        let mut k_tt = Array2::<T>::zeros((nt, nt));
        for (r, &i) in train_idx.iter().enumerate() {
            for (s, &j) in train_idx.iter().enumerate() {
                k_tt[[r, s]] = full_gram[[i, j]];
            }
        }
        let mut k_vt = Array2::<T>::zeros((val_idx.len(), nt));
        for (r, &i) in val_idx.iter().enumerate() {
            for (s, &j) in train_idx.iter().enumerate() {
                k_vt[[r, s]] = full_gram[[i, j]];
            }
        }
        let y_train: Vec<T> = train_idx.iter().map(|&i| data.y()[i]).collect();
        let y_val: Vec<T> = val_idx.iter().map(|&i| data.y()[i]).collect();
        let w_train: Vec<T> = train_idx.iter().map(|&i| all_weights[i]).collect();
        let score_loss = match loss.sample_weights() {
            Some(user) => {
                let val_w: Vec<T> = val_idx.iter().map(|&i| user[i]).collect();
                loss.without_weights().with_sample_weights(val_w)?
            }
            None => loss.without_weights(),
        };
        let max_iter = options.max_iter.unwrap_or(100 * nt * nt);

        for (gi, &c) in grid.iter().enumerate() {
            let (solution, intercept) = solve_on_gram(
                k_tt.view(),
                &y_train,
                &w_train,
                loss.tau(),
                c,
                options.tol,
                max_iter,
            )?;
            let mut predictions = Vec::with_capacity(val_idx.len());
            for row in k_vt.axis_iter(Axis(0)) {
                let mut acc = T::zero();
                for (&kij, &aj) in row.iter().zip(solution.alpha.iter()) {
                    acc = acc + kij * aj;
                }
                predictions.push(acc + intercept);
            }
            fold_scores[[gi, f]] = empirical_risk(&predictions, &y_val, &score_loss)?;
        }
    }

    // Mean score per grid value; NaN orders after +∞.
    let folds_t = lit::<T>(folds as f64);
    let mut best: Option<(T, T)> = None; // (mean, c)
    for (gi, &c) in grid.iter().enumerate() {
        let mut total = T::zero();
        for f in 0..folds {
            total = total + fold_scores[[gi, f]];
        }
        let mut mean = total / folds_t;
        if mean.is_nan() {
            mean = T::infinity();
        }
        best = match best {
            None => Some((mean, c)),
            Some((bm, bc)) => {
                if mean < bm || (mean == bm && c < bc) {
                    Some((mean, c))
                } else {
                    Some((bm, bc))
                }
            }
        };
    }
    let (_, best_c) = best.expect("grid is non-empty");

    Ok(CvReport {
        grid,
        fold_scores,
        best_c,
        folds,
        seed,
    })
}
