//! Discrete distributions and the pointwise MAPE-optimal predictor.
//!
//! For a discrete random variable `T` with atoms `t_k` and masses `p_k`, the
//! relative-error risk of predicting the constant `m` is
//!
//! ```text
//! J(m) = Σ_k p_k · |m − t_k| / |t_k|
//! ```
//!
//! (under the conventions `a/0 = +∞`, `0/0 = 1`). `J` is convex and piecewise
//! linear with breakpoints at the atoms, so its argmin is a single atom or a
//! closed interval between two consecutive atoms. The argmin interval can be
//! non-degenerate — the minimizer need not be unique — and this module follows
//! the midpoint convention in that case.

use crate::error::{Error, Result};
use crate::loss::{loss_value, LossSpec};
use crate::scalar::{lit, sum, Scalar};

/// A discrete probability distribution with strictly increasing atoms.
///
/// Construction sorts the atoms, merges duplicates (summing their masses) and
/// validates that masses are nonnegative and sum to 1 within `1e-12`.
#[derive(Clone, Debug)]
pub struct DiscreteDistribution<T> {
    atoms: Vec<T>,
    masses: Vec<T>,
}

impl<T: Scalar> DiscreteDistribution<T> {
    /// Build a distribution from parallel atom/mass vectors.
    pub fn new(atoms: Vec<T>, masses: Vec<T>) -> Result<Self> {
        let n = atoms.len();
        if n == 0 {
            return Err(Error::InvalidInput(
                "a distribution needs at least one atom".into(),
            ));
        }
        if masses.len() != n {
            return Err(Error::InvalidInput(format!(
                "atoms and masses must have equal length, got {n} and {}",
                masses.len()
            )));
        }
        for (i, &t) in atoms.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "atom at index {i} is not finite: {t}"
                )));
            }
        }
        for (i, &p) in masses.iter().enumerate() {
            if !(p >= T::zero() && p.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "mass at index {i} must be nonnegative and finite, got {p}"
                )));
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| atoms[a].partial_cmp(&atoms[b]).expect("atoms are finite"));

        let mut sorted_atoms: Vec<T> = Vec::with_capacity(n);
        let mut sorted_masses: Vec<T> = Vec::with_capacity(n);
        for &i in &order {
            if let Some(&last) = sorted_atoms.last() {
                if atoms[i] == last {
                    let m = sorted_masses.last_mut().expect("parallel vectors");
                    *m = *m + masses[i];
                    continue;
                }
            }
            sorted_atoms.push(atoms[i]);
            sorted_masses.push(masses[i]);
        }

        let total = sum(&sorted_masses);
        if (total - T::one()).abs() > lit(1e-12) {
            return Err(Error::InvalidInput(format!(
                "masses must sum to 1, got {total}"
            )));
        }
        Ok(DiscreteDistribution {
            atoms: sorted_atoms,
            masses: sorted_masses,
        })
    }

    /// Atoms, strictly increasing.
    pub fn atoms(&self) -> &[T] {
        &self.atoms
    }

    /// Masses, parallel to [`DiscreteDistribution::atoms`].
    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    /// Probability carried by the atom exactly equal to zero (0 if absent).
    pub fn mass_at_zero(&self) -> T {
        for (&t, &p) in self.atoms.iter().zip(&self.masses) {
            if t == T::zero() {
                return p;
            }
        }
        T::zero()
    }

    /// Evaluate `J(m) = Σ_k p_k |m − t_k| / |t_k|` as the direct weighted sum.
    ///
    /// Zero-mass atoms are skipped so they can never contribute `0 · ∞`.
    pub fn mape_objective(&self, m: T) -> T {
        let spec = LossSpec::<T>::mape();
        let mut acc = T::zero();
        for (&t, &p) in self.atoms.iter().zip(&self.masses) {
            if p > T::zero() {
                acc = acc + p * loss_value(m, t, &spec);
            }
        }
        acc
    }
}

/// Minimize `J(m) = E |m − T| / |T|` over `m` for a discrete `T`.
///
/// Returns `(m*, J(m*))`. When the argmin is a non-degenerate interval the
/// midpoint is returned. If `P(T = 0) > 0`, `J` is infinite everywhere except
/// at `m = 0` (where it equals 1 by the `0/0 = 1` convention), so the
/// minimizer is forced to 0.
///
/// The sweep is exact: with `u_k = p_k / |t_k|` and `U = Σ u_k`, the slope of
/// `J` immediately right of atom `j` is `2·Σ_{k ≤ j} u_k − U`, a nondecreasing
/// sequence whose first nonnegative entry locates the argmin — positive means
/// the unique minimizer is atom `j`, zero means the argmin interval stretches
/// to the next atom with positive mass. No tolerance or grid is involved.
pub fn pointwise_mape_minimizer<T: Scalar>(dist: &DiscreteDistribution<T>) -> (T, T) {
    if dist.mass_at_zero() > T::zero() {
        let zero = T::zero();
        return (zero, dist.mape_objective(zero));
    }

    let atoms = dist.atoms();
    let masses = dist.masses();
    let k = atoms.len();

    let u: Vec<T> = atoms
        .iter()
        .zip(masses)
        .map(|(&t, &p)| {
            if p > T::zero() {
                p / t.abs()
            } else {
                T::zero()
            }
        })
        .collect();
    let total = sum(&u);

    let two = T::one() + T::one();
    let mut cumulative = T::zero();
    let mut slopes: Vec<T> = Vec::with_capacity(k);
    for &ui in &u {
        cumulative = cumulative + ui;
        slopes.push(two * cumulative - total);
    }

    // First index with nonnegative right-slope; exists because the last slope
    // equals +U > 0.
    let mut j = 0;
    while slopes[j] < T::zero() {
        j += 1;
    }

    let m_star = if slopes[j] > T::zero() {
        atoms[j]
    } else {
        // Zero slope: flat from atom j to the next atom after the zero run
        // (zero-mass atoms inside the run do not break flatness).
        let mut last = j;
        while slopes[last + 1] == T::zero() {
            last += 1;
        }
        (atoms[j] + atoms[last + 1]) / two
    };
    (m_star, dist.mape_objective(m_star))
}
