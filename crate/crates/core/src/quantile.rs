//! Weighted quantiles as minimizers of the weighted check loss.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimize `Σ w_i · ρ_τ(v_i − m)` over `m`.
///
/// The objective is convex and piecewise linear in `m`; its argmin is either a
/// single data value or a closed interval between two consecutive values. In
/// the interval case the **midpoint** is returned, which makes the result
/// deterministic and symmetric. `τ = 0` (`τ = 1`) returns the smallest
/// (largest) value, the finite edge of the otherwise unbounded argmin.
///
/// # Errors
///
/// Empty input, mismatched lengths, non-finite values, non-positive weights
/// and `τ ∉ [0, 1]` are inputs errors.
pub fn weighted_quantile<T: Scalar>(values: &[T], weights: &[T], tau: T) -> Result<T> {
    let n = values.len();
    if n == 0 {
        return Err(Error::InvalidInput(
            "weighted quantile of an empty sample is undefined".into(),
        ));
    }
    if weights.len() != n {
        return Err(Error::InvalidInput(format!(
            "values and weights must have equal length, got {n} and {}",
            weights.len()
        )));
    }
    if !(tau >= T::zero() && tau <= T::one()) {
        return Err(Error::InvalidInput(format!(
            "tau must lie in [0, 1], got {tau}"
        )));
    }
    for (i, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::InvalidInput(format!(
                "value at index {i} is not finite: {v}"
            )));
        }
    }
    for (i, &w) in weights.iter().enumerate() {
        if !(w > T::zero() && w.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "weight at index {i} must be strictly positive and finite, got {w}"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("values are finite")
    });

    // Right of the j-th sorted value the objective has slope C_j − τW, where
    // C_j is the cumulative weight through j and W the total. The slope is
    // strictly increasing in j (weights are positive), so it crosses zero at
    // most once: the first j with slope >= 0 is the left edge of the argmin,
    // and slope == 0 there means the argmin is the interval [v_j, v_{j+1}].
    let mut cumulative: Vec<T> = Vec::with_capacity(n);
    let mut acc = T::zero();
    for &i in &order {
        acc = acc + weights[i];
        cumulative.push(acc);
    }
    let total = cumulative[n - 1];
    let threshold = tau * total;

    for j in 0..n {
        let slope = cumulative[j] - threshold;
        if slope >= T::zero() {
            let vj = values[order[j]];
            if slope > T::zero() || j + 1 == n {
                return Ok(vj);
            }
            let vnext = values[order[j + 1]];
            return Ok((vj + vnext) / (T::one() + T::one()));
        }
    }
    // Unreachable: the last slope is (1 − τ)·W >= 0 and the τ = 1 case hits
    // the exact zero branch at j = n − 1.
    Ok(values[order[n - 1]])
}
