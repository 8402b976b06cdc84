//! Dual quadratic program and its SMO solver.
//!
//! Kernel regression under MAPE, MAE, or pinball loss reduces to the concave
//! box-constrained QP
//!
//! ```text
//! maximize    α^T y − ½ α^T K α
//! subject to  1^T α = 0,    lower_i ≤ α_i ≤ upper_i
//! ```
//!
//! where `K` is the kernel Gram matrix and the box depends on the loss:
//! MAPE gives per-sample bounds `C(τ−1)/y_i² ≤ α_i ≤ Cτ/y_i²`, while MAE and
//! the general pinball loss give the target-independent box
//! `C(τ−1) ≤ α_i ≤ Cτ` (MAE is pinball at τ = ½). [`make_bounds`] builds the
//! box, [`solve_dual`] maximizes the objective with a sequential
//! minimal-optimization (SMO) sweep over maximal-violating pairs, and
//! [`recover_intercept`] reconstructs the bias term `b` from the KKT
//! conditions. The prediction function is
//! `f(x) = Σ_j α_j k(x_j, x) + b`.
//!
//! The pairwise update moves `α_i` up and `α_j` down by the same amount, so
//! the equality constraint is conserved by construction; steps that land on a
//! box face are snapped to the bound bit-exactly.

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::kernel::check_symmetric;
use crate::loss::LossKind;
use crate::quantile::weighted_quantile;
use crate::scalar::{lit, Scalar};

/// Per-coordinate box `lower_i ≤ α_i ≤ upper_i` for the dual variables.
///
/// Invariants (validated at construction): equal lengths, all entries
/// finite, `lower_i ≤ 0 ≤ upper_i` (so α = 0 is always feasible), and
/// `lower_i < upper_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxBounds<T: Scalar> {
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Scalar> BoxBounds<T> {
    /// Validated construction from explicit bound vectors.
    pub fn new(lower: Vec<T>, upper: Vec<T>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidInput("bounds must be non-empty".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::InvalidInput(format!(
                "bound vectors have mismatched lengths {} and {}",
                lower.len(),
                upper.len()
            )));
        }
        for i in 0..lower.len() {
            let (l, u) = (lower[i], upper[i]);
            if !(l.is_finite() && u.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "bounds must be finite, got [{l}, {u}] at index {i}"
                )));
            }
            if !(l <= T::zero() && T::zero() <= u) {
                return Err(Error::InvalidInput(format!(
                    "bounds must bracket zero, got [{l}, {u}] at index {i}"
                )));
            }
            if !(l < u) {
                return Err(Error::InvalidInput(format!(
                    "lower bound must be strictly below upper, got [{l}, {u}] at index {i}"
                )));
            }
        }
        Ok(BoxBounds { lower, upper })
    }

    /// Box `[C(τ−1)·w_i, Cτ·w_i]` from positive per-sample dual weights.
    ///
    /// This is the general form behind [`make_bounds`]: the structural
    /// weight is `1/y_i²` for MAPE and `1` for MAE/pinball, and fitting with
    /// user sample weights multiplies them in.
    pub fn from_weights(weights: &[T], c: T, tau: T) -> Result<Self> {
        if !(c.is_finite() && c > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "regularization constant C must be positive and finite, got {c}"
            )));
        }
        if !(tau.is_finite() && tau >= T::zero() && tau <= T::one()) {
            return Err(Error::InvalidInput(format!(
                "quantile level tau must lie in [0, 1], got {tau}"
            )));
        }
        if weights.is_empty() {
            return Err(Error::InvalidInput("dual weights must be non-empty".into()));
        }
        let lo_coef = c * (tau - T::one());
        let hi_coef = c * tau;
        let mut lower = Vec::with_capacity(weights.len());
        let mut upper = Vec::with_capacity(weights.len());
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w > T::zero()) {
                return Err(Error::InvalidInput(format!(
                    "dual weights must be positive and finite, got {w} at index {i}"
                )));
            }
            lower.push(lo_coef * w);
            upper.push(hi_coef * w);
        }
        BoxBounds::new(lower, upper)
    }

    /// Lower bounds.
    pub fn lower(&self) -> &[T] {
        &self.lower
    }

    /// Upper bounds.
    pub fn upper(&self) -> &[T] {
        &self.upper
    }

    /// Number of coordinates.
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    /// True when the box has no coordinates (never produced by constructors).
    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }
}

/// Dual box for a loss family: MAPE scales the pinball box by `1/y_i²`.
///
/// * `LossKind::Mape` — `[C(τ−1)/y_i², Cτ/y_i²]`; every target must be
///   nonzero, otherwise the bounds are undefined and the input is rejected.
/// * `LossKind::Mae` / `LossKind::Pinball` — `[C(τ−1), Cτ]` for every sample
///   (MAE simply pins τ = ½ at the call site).
///
/// When every `|y_i| = 1` the MAPE box coincides bit-for-bit with the MAE
/// box, because the structural weight `1/y_i²` is exactly `1`.
pub fn make_bounds<T: Scalar>(
    targets: &[T],
    c: T,
    tau: T,
    loss_kind: LossKind,
) -> Result<BoxBounds<T>> {
    if targets.is_empty() {
        return Err(Error::InvalidInput("targets must be non-empty".into()));
    }
    let mut weights = Vec::with_capacity(targets.len());
    for (i, &y) in targets.iter().enumerate() {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!(
                "targets must be finite, got {y} at row {i}"
            )));
        }
        let w = match loss_kind {
            LossKind::Mape => {
                if y == T::zero() {
                    return Err(Error::InvalidInput(format!(
                        "MAPE dual bounds are undefined for target 0 at row {i}"
                    )));
                }
                T::one() / (y * y)
            }
            LossKind::Mae | LossKind::Pinball => T::one(),
        };
        weights.push(w);
    }
    BoxBounds::from_weights(&weights, c, tau)
}

/// Result of a dual solve.
#[derive(Clone, Debug)]
pub struct DualSolution<T: Scalar> {
    /// Dual coefficients, feasible for the box and the sum constraint.
    pub alpha: Vec<T>,
    /// Bias term `b`. [`solve_dual`] leaves this at zero; callers fill it
    /// with [`recover_intercept`].
    pub intercept: T,
    /// Final dual objective `α^T y − ½ α^T K α`.
    pub objective: T,
    /// Number of pairwise updates performed.
    pub iterations: usize,
    /// Maximal-violating-pair KKT gap at termination (clamped at zero;
    /// a strictly negative gap certifies optimality).
    pub max_kkt_violation: T,
    /// True when the KKT gap reached the tolerance within the iteration
    /// budget; false means the budget ran out (reported, never raised).
    pub converged: bool,
    /// Set when a pairwise curvature `K_ii + K_jj − 2K_ij` was negative
    /// beyond rounding tolerance — evidence the supplied matrix is not
    /// positive semidefinite. The solver continues with box-edge steps.
    pub psd_warning: bool,
}

/// Low-level SMO state machine over a borrowed Gram matrix.
///
/// [`solve_dual`] wraps this in the usual validate-solve-report flow; the
/// type is public so tests and benchmarks can drive single updates and watch
/// invariants (objective monotonicity, exact feasibility) step by step.
pub struct SmoSolver<'k, 'y, 'b, T: Scalar> {
    k: ArrayView2<'k, T>,
    targets: &'y [T],
    bounds: &'b BoxBounds<T>,
    alpha: Vec<T>,
    /// Maintained gradient of the objective: `g = y − Kα`.
    grad: Vec<T>,
    iterations: usize,
    psd_warning: bool,
}

impl<'k, 'y, 'b, T: Scalar> SmoSolver<'k, 'y, 'b, T> {
    /// Initialize at the feasible point α = 0 (so `g = y`).
    ///
    /// Validates dimensions and symmetry of `k`; positive semidefiniteness
    /// is not checked up front (violations surface as `psd_warning`).
    pub fn new(k: ArrayView2<'k, T>, targets: &'y [T], bounds: &'b BoxBounds<T>) -> Result<Self> {
        check_symmetric(k)?;
        let n = targets.len();
        if n == 0 {
            return Err(Error::InvalidInput("targets must be non-empty".into()));
        }
        if k.nrows() != n {
            return Err(Error::InvalidInput(format!(
                "Gram matrix is {}x{} but there are {} targets",
                k.nrows(),
                k.ncols(),
                n
            )));
        }
        if bounds.len() != n {
            return Err(Error::InvalidInput(format!(
                "bounds have {} coordinates but there are {} targets",
                bounds.len(),
                n
            )));
        }
        for (i, &y) in targets.iter().enumerate() {
            if !y.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "targets must be finite, got {y} at row {i}"
                )));
            }
        }
        Ok(SmoSolver {
            k,
            targets,
            bounds,
            alpha: vec![T::zero(); n],
            grad: targets.to_vec(),
            iterations: 0,
            psd_warning: false,
        })
    }

    /// Current dual coefficients.
    pub fn alpha(&self) -> &[T] {
        &self.alpha
    }

    /// Pairwise updates performed so far.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Whether a negative pairwise curvature has been observed.
    pub fn psd_warning(&self) -> bool {
        self.psd_warning
    }

    /// Dual objective `α^T y − ½ α^T K α`, computed directly in O(n²).
    pub fn objective(&self) -> T {
        let n = self.alpha.len();
        let mut linear = T::zero();
        let mut quad = T::zero();
        for i in 0..n {
            let ai = self.alpha[i];
            if ai == T::zero() {
                continue;
            }
            linear = linear + ai * self.targets[i];
            let mut row = T::zero();
            for (&kij, &aj) in self.k.row(i).iter().zip(self.alpha.iter()) {
                row = row + kij * aj;
            }
            quad = quad + ai * row;
        }
        linear - lit::<T>(0.5) * quad
    }

    /// Maximal violating pair `(i, j, gap)` under the current gradient.
    ///
    /// `i` maximizes `g` over `I_up = {i : α_i < upper_i}` and `j` minimizes
    /// `g` over `I_low = {j : α_j > lower_j}`; `gap = g_i − g_j`. Ties are
    /// broken toward the smallest index, making selection deterministic.
    /// Returns `None` when either index set is empty; a gap ≤ 0 certifies
    /// optimality of the current point.
    pub fn violating_pair(&self) -> Option<(usize, usize, T)> {
        let mut best_up: Option<(usize, T)> = None;
        let mut best_low: Option<(usize, T)> = None;
        for t in 0..self.alpha.len() {
            let a = self.alpha[t];
            let g = self.grad[t];
            if a < self.bounds.upper()[t] && best_up.map_or(true, |(_, v)| g > v) {
                best_up = Some((t, g));
            }
            if a > self.bounds.lower()[t] && best_low.map_or(true, |(_, v)| g < v) {
                best_low = Some((t, g));
            }
        }
        match (best_up, best_low) {
            (Some((i, gi)), Some((j, gj))) => Some((i, j, gi - gj)),
            _ => None,
        }
    }

    /// One pairwise update: raise `α_i`, lower `α_j` by the same step.
    ///
    /// The unconstrained maximizer along this direction is
    /// `δ* = (g_i − g_j) / (K_ii + K_jj − 2K_ij)`; the applied step is `δ*`
    /// clipped to the box caps `upper_i − α_i` and `α_j − lower_j`.
    /// Degenerate curvature (≤ 1e-12) falls back to the full box-edge step,
    /// which is still an ascent step whenever the gap is positive. A step
    /// that equals its cap lands on the bound bit-exactly. Returns the
    /// applied step (zero when no progress is possible).
    pub fn step(&mut self, i: usize, j: usize) -> T {
        assert!(i != j, "pairwise update needs two distinct coordinates");
        let gap = self.grad[i] - self.grad[j];
        if !(gap > T::zero()) {
            return T::zero();
        }
        let kii = self.k[[i, i]];
        let kjj = self.k[[j, j]];
        let kij = self.k[[i, j]];
        let eta = kii + kjj - (kij + kij);
        let curvature_scale = kii.abs() + kjj.abs() + T::one();
        if eta < -lit::<T>(1e-8) * curvature_scale {
            self.psd_warning = true;
        }
        let cap_i = self.bounds.upper()[i] - self.alpha[i];
        let cap_j = self.alpha[j] - self.bounds.lower()[j];
        let mut delta = cap_i.min(cap_j);
        if eta > lit::<T>(1e-12) {
            let unconstrained = gap / eta;
            if unconstrained < delta {
                delta = unconstrained;
            }
        }
        if !(delta > T::zero()) {
            return T::zero();
        }
        // Land exactly on a bound when the step equals its cap, and clamp
        // against stray rounding; the gradient update uses the deltas that
        // were actually applied, so `grad` tracks `alpha` faithfully.
        let new_ai = if delta == cap_i {
            self.bounds.upper()[i]
        } else {
            (self.alpha[i] + delta)
                .min(self.bounds.upper()[i])
                .max(self.bounds.lower()[i])
        };
        let new_aj = if delta == cap_j {
            self.bounds.lower()[j]
        } else {
            (self.alpha[j] - delta)
                .min(self.bounds.upper()[j])
                .max(self.bounds.lower()[j])
        };
        let di = new_ai - self.alpha[i];
        let dj = new_aj - self.alpha[j];
        self.alpha[i] = new_ai;
        self.alpha[j] = new_aj;
        let row_i = self.k.row(i);
        let row_j = self.k.row(j);
        for ((g, &kit), &kjt) in self.grad.iter_mut().zip(row_i.iter()).zip(row_j.iter()) {
            *g = *g - di * kit - dj * kjt;
        }
        delta
    }

    /// Recompute `g = y − Kα` from scratch (O(n²)).
    ///
    /// The incremental updates in [`SmoSolver::step`] accumulate rounding
    /// over long runs; the solve loop refreshes once before declaring
    /// convergence so the reported KKT gap is trustworthy.
    pub fn refresh_gradient(&mut self) {
        for t in 0..self.grad.len() {
            let mut acc = T::zero();
            for (&ktj, &aj) in self.k.row(t).iter().zip(self.alpha.iter()) {
                if aj != T::zero() {
                    acc = acc + ktj * aj;
                }
            }
            self.grad[t] = self.targets[t] - acc;
        }
    }

    /// Run maximal-violating-pair updates until the KKT gap is ≤ `tol` or
    /// `max_iter` updates have been spent. Returns `(converged, gap)` with
    /// the gap clamped at zero. Both termination paths re-verify against a
    /// freshly recomputed gradient before being reported.
    pub fn solve(&mut self, tol: T, max_iter: usize) -> (bool, T) {
        let mut trusted = false; // gradient refreshed since the last step
        loop {
            let pair = self.violating_pair();
            let gap = match pair {
                Some((_, _, g)) => g,
                None => T::neg_infinity(),
            };
            if gap <= tol {
                if trusted {
                    return (true, gap.max(T::zero()));
                }
                self.refresh_gradient();
                trusted = true;
                continue;
            }
            if self.iterations >= max_iter {
                if trusted {
                    return (false, gap);
                }
                self.refresh_gradient();
                trusted = true;
                continue;
            }
            let (i, j, _) = pair.expect("a positive gap implies a pair");
            self.step(i, j);
            self.iterations += 1;
            trusted = false;
        }
    }
}

/// Maximize `α^T y − ½ α^T K α` over `1^T α = 0` and the box.
///
/// Starts from the always-feasible α = 0 and applies maximal-violating-pair
/// SMO updates. The objective is nondecreasing across updates and every
/// iterate is exactly feasible. Hitting `max_iter` is reported through
/// `converged = false` and the final `max_kkt_violation` rather than as an
/// error, so hyper-parameter sweeps survive hard instances. The returned
/// `intercept` is zero; use [`recover_intercept`].
pub fn solve_dual<T: Scalar>(
    k: ArrayView2<'_, T>,
    targets: &[T],
    bounds: &BoxBounds<T>,
    tol: T,
    max_iter: usize,
) -> Result<DualSolution<T>> {
    if !(tol.is_finite() && tol > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive and finite, got {tol}"
        )));
    }
    if max_iter == 0 {
        return Err(Error::InvalidInput(
            "iteration budget must be at least 1".into(),
        ));
    }
    let mut solver = SmoSolver::new(k, targets, bounds)?;
    let (converged, gap) = solver.solve(tol, max_iter);
    Ok(DualSolution {
        objective: solver.objective(),
        iterations: solver.iterations(),
        max_kkt_violation: gap.max(T::zero()),
        converged,
        psd_warning: solver.psd_warning(),
        alpha: solver.alpha,
        intercept: T::zero(),
    })
}

/// Maximal-violating-pair KKT gap of a feasible point, clamped at zero.
///
/// Computes `g = y − Kα` from scratch and returns
/// `max(0, max_{I_up} g − min_{I_low} g)` with
/// `I_up = {i : α_i < upper_i}`, `I_low = {j : α_j > lower_j}`. A result of
/// zero (≤ the solve tolerance) certifies optimality for this concave QP.
/// When either index set is empty — e.g. a single sample pinned to α = 0 —
/// there is no pair to violate and the gap is zero.
pub fn kkt_violation<T: Scalar>(
    alpha: &[T],
    k: ArrayView2<'_, T>,
    targets: &[T],
    bounds: &BoxBounds<T>,
) -> Result<T> {
    let n = alpha.len();
    if targets.len() != n || bounds.len() != n || k.nrows() != n || k.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "kkt_violation dimension mismatch: alpha {}, targets {}, bounds {}, K {}x{}",
            n,
            targets.len(),
            bounds.len(),
            k.nrows(),
            k.ncols()
        )));
    }
    let mut best_up: Option<T> = None;
    let mut best_low: Option<T> = None;
    for t in 0..n {
        let mut acc = T::zero();
        for (&ktj, &aj) in k.row(t).iter().zip(alpha.iter()) {
            if aj != T::zero() {
                acc = acc + ktj * aj;
            }
        }
        let g = targets[t] - acc;
        if alpha[t] < bounds.upper()[t] && best_up.map_or(true, |v| g > v) {
            best_up = Some(g);
        }
        if alpha[t] > bounds.lower()[t] && best_low.map_or(true, |v| g < v) {
            best_low = Some(g);
        }
    }
    Ok(match (best_up, best_low) {
        (Some(up), Some(low)) => (up - low).max(T::zero()),
        _ => T::zero(),
    })
}

/// Recover the bias `b` from a solved dual.
///
/// With `f_i = Σ_j α_j K_ij`, the KKT conditions pin the residual `y_i − f_i`
/// to `b` for every *free* sample — one whose `α_i` sits strictly inside its
/// box by a margin of `1e-8` times the box width. `b` is the median of the
/// free residuals (midpoint convention on even counts). When no sample is
/// free, `b` falls back to the weighted τ-quantile of all residuals under
/// the supplied positive dual weights, which is the empirical-risk-optimal
/// constant shift for the pinball family.
pub fn recover_intercept<T: Scalar>(
    alpha: &[T],
    k: ArrayView2<'_, T>,
    targets: &[T],
    bounds: &BoxBounds<T>,
    tau: T,
    weights: &[T],
) -> Result<T> {
    let n = alpha.len();
    if targets.len() != n || bounds.len() != n || weights.len() != n || k.nrows() != n {
        return Err(Error::InvalidInput(format!(
            "recover_intercept dimension mismatch: alpha {}, targets {}, bounds {}, weights {}, K {}x{}",
            n,
            targets.len(),
            bounds.len(),
            weights.len(),
            k.nrows(),
            k.ncols()
        )));
    }
    let margin_factor = lit::<T>(1e-8);
    let mut residuals = Vec::with_capacity(n);
    let mut free_residuals = Vec::new();
    for t in 0..n {
        let mut f = T::zero();
        for (&ktj, &aj) in k.row(t).iter().zip(alpha.iter()) {
            if aj != T::zero() {
                f = f + ktj * aj;
            }
        }
        let r = targets[t] - f;
        residuals.push(r);
        let margin = margin_factor * (bounds.upper()[t] - bounds.lower()[t]);
        if alpha[t] - bounds.lower()[t] > margin && bounds.upper()[t] - alpha[t] > margin {
            free_residuals.push(r);
        }
    }
    if free_residuals.is_empty() {
        weighted_quantile(&residuals, weights, tau)
    } else {
        let ones = vec![T::one(); free_residuals.len()];
        weighted_quantile(&free_residuals, &ones, lit::<T>(0.5))
    }
}
