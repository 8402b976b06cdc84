//! Loss functions and empirical risk.
//!
//! Three losses are supported:
//!
//! * **MAPE** — relative absolute error `|p − y| / |y|` with the conventions
//!   `a/0 = +∞` for `a ≠ 0` and `0/0 = 1`, so every input has a well-defined
//!   (possibly infinite) loss value;
//! * **MAE** — absolute error `|p − y|`;
//! * **Pinball** — the check function `ρ_τ(y − p)` with
//!   `ρ_τ(ξ) = τ·ξ` for `ξ ≥ 0` and `(τ − 1)·ξ` otherwise, whose minimizer is
//!   the τ-quantile.
//!
//! MAPE and MAE are symmetric losses and imply `τ = 1/2`; the quantile level
//! is a free parameter only for the pinball loss.

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Which loss family a [`LossSpec`] denotes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Relative absolute error `|p − y| / |y|`.
    Mape,
    /// Absolute error `|p − y|`.
    Mae,
    /// Check (quantile) loss `ρ_τ(y − p)`.
    Pinball,
}

impl LossKind {
    /// Stable lower-case name (`mape`, `mae`, `pinball`).
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Mape => "mape",
            LossKind::Mae => "mae",
            LossKind::Pinball => "pinball",
        }
    }

    /// Inverse of [`LossKind::name`].
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "mape" => Ok(LossKind::Mape),
            "mae" => Ok(LossKind::Mae),
            "pinball" => Ok(LossKind::Pinball),
            other => Err(Error::InvalidInput(format!(
                "unknown loss kind `{other}` (expected mape, mae or pinball)"
            ))),
        }
    }
}

/// A fully specified loss: family, quantile level and optional per-sample
/// weights.
///
/// Constructed through [`LossSpec::mape`], [`LossSpec::mae`] or
/// [`LossSpec::pinball`], so every value of this type satisfies
/// `0 ≤ τ ≤ 1` and has strictly positive, finite weights.
#[derive(Clone, Debug)]
pub struct LossSpec<T> {
    kind: LossKind,
    tau: T,
    sample_weights: Option<Vec<T>>,
}

impl<T: Scalar> LossSpec<T> {
    /// Relative absolute error; `τ = 1/2`.
    pub fn mape() -> Self {
        LossSpec {
            kind: LossKind::Mape,
            tau: lit(0.5),
            sample_weights: None,
        }
    }

    /// Absolute error; `τ = 1/2`.
    pub fn mae() -> Self {
        LossSpec {
            kind: LossKind::Mae,
            tau: lit(0.5),
            sample_weights: None,
        }
    }

    /// Check loss at quantile level `tau ∈ [0, 1]`.
    pub fn pinball(tau: T) -> Result<Self> {
        if !(tau >= T::zero() && tau <= T::one()) {
            return Err(Error::InvalidInput(format!(
                "quantile level tau must lie in [0, 1], got {tau}"
            )));
        }
        Ok(LossSpec {
            kind: LossKind::Pinball,
            tau,
            sample_weights: None,
        })
    }

    /// Attach per-sample weights (all strictly positive and finite).
    ///
    /// Weights multiply each sample's loss inside [`empirical_risk`] and scale
    /// the corresponding dual box bounds when fitting.
    pub fn with_sample_weights(mut self, weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidInput(
                "sample weights must be non-empty".into(),
            ));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w > T::zero() && w.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "sample weight at index {i} must be strictly positive and finite, got {w}"
                )));
            }
        }
        self.sample_weights = Some(weights);
        Ok(self)
    }

    /// Loss family.
    pub fn kind(&self) -> LossKind {
        self.kind
    }

    /// Quantile level (1/2 for MAPE and MAE).
    pub fn tau(&self) -> T {
        self.tau
    }

    /// Optional per-sample weights.
    pub fn sample_weights(&self) -> Option<&[T]> {
        self.sample_weights.as_deref()
    }

    /// Same spec without weights (used when scoring sets of a different size).
    pub fn without_weights(&self) -> Self {
        LossSpec {
            kind: self.kind,
            tau: self.tau,
            sample_weights: None,
        }
    }
}

/// Per-sample loss value; nonnegative, possibly `+∞`.
///
/// No input is an error: for MAPE the conventions `a/0 = +∞` (`a ≠ 0`) and
/// `0/0 = 1` make the value well defined everywhere.
pub fn loss_value<T: Scalar>(prediction: T, target: T, spec: &LossSpec<T>) -> T {
    match spec.kind {
        LossKind::Mape => {
            if target == T::zero() {
                if prediction == T::zero() {
                    T::one()
                } else {
                    T::infinity()
                }
            } else {
                (prediction - target).abs() / target.abs()
            }
        }
        LossKind::Mae => (prediction - target).abs(),
        LossKind::Pinball => {
            let xi = target - prediction;
            if xi >= T::zero() {
                spec.tau * xi
            } else {
                (spec.tau - T::one()) * xi
            }
        }
    }
}

/// Mean (optionally weighted) loss: `(1/n) Σ w_i · loss(p_i, y_i)`.
///
/// Infinite per-sample losses propagate to an infinite risk.
pub fn empirical_risk<T: Scalar>(
    predictions: &[T],
    targets: &[T],
    spec: &LossSpec<T>,
) -> Result<T> {
    let n = predictions.len();
    if n == 0 {
        return Err(Error::InvalidInput(
            "empirical risk of an empty sample is undefined".into(),
        ));
    }
    if targets.len() != n {
        return Err(Error::InvalidInput(format!(
            "predictions and targets must have equal length, got {n} and {}",
            targets.len()
        )));
    }
    if let Some(w) = spec.sample_weights() {
        if w.len() != n {
            return Err(Error::InvalidInput(format!(
                "sample weights length {} does not match sample size {n}",
                w.len()
            )));
        }
    }
    let mut acc = T::zero();
    for i in 0..n {
        let l = loss_value(predictions[i], targets[i], spec);
        let term = match spec.sample_weights() {
            Some(w) => w[i] * l,
            None => l,
        };
        acc = acc + term;
    }
    Ok(acc / lit(n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn mape_direct_formula() {
        let spec = LossSpec::<f64>::mape();
        assert!(close(loss_value(3.0, 2.0, &spec), 0.5, 0.0));
    }

    #[test]
    fn mape_division_conventions() {
        let spec = LossSpec::<f64>::mape();
        assert_eq!(loss_value(0.0, 0.0, &spec), 1.0);
        assert_eq!(loss_value(1.0, 0.0, &spec), f64::INFINITY);
        // Negative zero is still zero.
        assert_eq!(loss_value(0.0, -0.0, &spec), 1.0);
    }

    #[test]
    fn pinball_piecewise_values() {
        let spec = LossSpec::pinball(0.3).unwrap();
        // p=1, y=3: xi = 2 >= 0, value = tau * xi.
        assert!(close(loss_value(1.0, 3.0, &spec), 0.6, 1e-15));
        // p=3, y=1: xi = -2, value = (tau - 1) * xi.
        assert!(close(loss_value(3.0, 1.0, &spec), 1.4, 1e-15));
    }

    #[test]
    fn mae_is_absolute_error() {
        let spec = LossSpec::<f64>::mae();
        assert_eq!(loss_value(-1.0, 2.5, &spec), 3.5);
    }

    #[test]
    fn tau_out_of_range_rejected() {
        assert!(LossSpec::pinball(-0.1).is_err());
        assert!(LossSpec::pinball(1.5).is_err());
        assert!(LossSpec::pinball(f64::NAN).is_err());
        assert!(LossSpec::pinball(0.0).is_ok());
        assert!(LossSpec::pinball(1.0).is_ok());
    }

    #[test]
    fn weights_must_be_positive_and_finite() {
        assert!(LossSpec::<f64>::mae()
            .with_sample_weights(vec![1.0, 0.0])
            .is_err());
        assert!(LossSpec::<f64>::mae()
            .with_sample_weights(vec![1.0, -2.0])
            .is_err());
        assert!(LossSpec::<f64>::mae()
            .with_sample_weights(vec![f64::INFINITY])
            .is_err());
        assert!(LossSpec::<f64>::mae().with_sample_weights(vec![]).is_err());
        assert!(LossSpec::<f64>::mae()
            .with_sample_weights(vec![0.5, 2.0])
            .is_ok());
    }

    #[test]
    fn risk_of_identity_predictions_is_zero() {
        let preds = [1.0, -2.0, 0.5];
        for spec in [
            LossSpec::mae(),
            LossSpec::mape(),
            LossSpec::pinball(0.3).unwrap(),
        ] {
            assert_eq!(empirical_risk(&preds, &preds, &spec).unwrap(), 0.0);
        }
    }

    #[test]
    fn risk_direct_example() {
        let spec = LossSpec::<f64>::mape();
        let risk = empirical_risk(&[1.0, 1.0], &[2.0, 0.5], &spec).unwrap();
        assert!(close(risk, 0.75, 0.0));
    }

    #[test]
    fn risk_zero_over_zero_convention() {
        let spec = LossSpec::<f64>::mape();
        let risk = empirical_risk(&[0.0, 0.0], &[0.0, 0.0], &spec).unwrap();
        assert_eq!(risk, 1.0);
    }

    #[test]
    fn risk_propagates_infinity() {
        let spec = LossSpec::<f64>::mape();
        let risk = empirical_risk(&[1.0, 1.0], &[0.0, 1.0], &spec).unwrap();
        assert_eq!(risk, f64::INFINITY);
    }

    #[test]
    fn risk_length_mismatch_is_an_error() {
        let spec = LossSpec::<f64>::mae();
        assert!(empirical_risk(&[1.0], &[1.0, 2.0], &spec).is_err());
        assert!(empirical_risk::<f64>(&[], &[], &spec).is_err());
        let weighted = LossSpec::<f64>::mae()
            .with_sample_weights(vec![1.0])
            .unwrap();
        assert!(empirical_risk(&[1.0, 2.0], &[1.0, 2.0], &weighted).is_err());
    }

    #[test]
    fn weighted_risk_applies_weights() {
        let spec = LossSpec::<f64>::mae()
            .with_sample_weights(vec![3.0, 1.0])
            .unwrap();
        // (3*|1-2| + 1*|0-4|)/2 = (3 + 4)/2 = 3.5
        let risk = empirical_risk(&[1.0, 0.0], &[2.0, 4.0], &spec).unwrap();
        assert!(close(risk, 3.5, 1e-15));
    }

    #[test]
    fn mape_scale_invariance_pinned_factors() {
        let spec = LossSpec::<f64>::mape();
        let preds = [1.0, 2.0, -0.7, 3.3];
        let targets = [0.9, -2.5, 1.1, 3.0];
        let base = empirical_risk(&preds, &targets, &spec).unwrap();
        for c in [0.1, 7.0, -2.0] {
            let sp: Vec<f64> = preds.iter().map(|p| c * p).collect();
            let st: Vec<f64> = targets.iter().map(|y| c * y).collect();
            let scaled = empirical_risk(&sp, &st, &spec).unwrap();
            assert!(close(scaled, base, 1e-12), "c={c}: {scaled} vs {base}");
        }
    }

    proptest! {
        // MAPE is scale-free: scaling predictions and targets by any c != 0
        // leaves the loss unchanged (up to roundoff).
        #[test]
        fn mape_scale_invariance(
            p in -1e3f64..1e3,
            y in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
            c in prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3],
        ) {
            let spec = LossSpec::<f64>::mape();
            let base = loss_value(p, y, &spec);
            let scaled = loss_value(c * p, c * y, &spec);
            prop_assert!((scaled - base).abs() <= 1e-12 * (1.0 + base));
        }

        // With min |y_i| = y_l > 0, MAPE risk <= MAE risk / y_l.
        #[test]
        fn mape_bounded_by_mae_over_y_l(
            pairs in prop::collection::vec((-1e3f64..1e3, prop_oneof![-1e3f64..-1e-3, 1e-3f64..1e3]), 1..40)
        ) {
            let preds: Vec<f64> = pairs.iter().map(|&(p, _)| p).collect();
            let targets: Vec<f64> = pairs.iter().map(|&(_, y)| y).collect();
            let y_l = targets.iter().fold(f64::INFINITY, |m, y| m.min(y.abs()));
            let mape = empirical_risk(&preds, &targets, &LossSpec::mape()).unwrap();
            let mae = empirical_risk(&preds, &targets, &LossSpec::mae()).unwrap();
            prop_assert!(mape <= mae / y_l + 1e-12 * (1.0 + mape));
        }

        // Pinball at tau = 1/2 is half the absolute error.
        #[test]
        fn pinball_half_is_half_mae(p in -1e3f64..1e3, y in -1e3f64..1e3) {
            let pin = loss_value(p, y, &LossSpec::pinball(0.5).unwrap());
            let mae = loss_value(p, y, &LossSpec::<f64>::mae());
            prop_assert!((2.0 * pin - mae).abs() <= 1e-12 * (1.0 + mae));
        }
    }
}
