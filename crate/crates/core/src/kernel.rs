//! Kernel functions and Gram-matrix assembly.
//!
//! Two kernels are provided:
//!
//! * **Gaussian (RBF)** — `k(x, x') = exp(-γ ‖x − x'‖²)` with bandwidth
//!   parameter `γ > 0`. Larger `γ` means a narrower kernel. Entries lie in
//!   `(0, 1]` and the diagonal of a Gram matrix is exactly 1.
//! * **Linear** — `k(x, x') = ⟨x, x'⟩`.
//!
//! [`KernelSpec::gram_matrix`] computes the dense kernel matrix of a sample,
//! filling the upper triangle and mirroring it so the result is symmetric
//! *bit for bit* — downstream solver code relies on exact symmetry.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Kernel choice plus its hyper-parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelSpec<T: Scalar> {
    /// Gaussian radial basis function `exp(-gamma * ||x - x'||^2)`.
    Gaussian {
        /// Bandwidth parameter, must be positive and finite.
        gamma: T,
    },
    /// Plain dot product `<x, x'>`.
    Linear,
}

impl<T: Scalar> KernelSpec<T> {
    /// Gaussian kernel with validated bandwidth.
    pub fn gaussian(gamma: T) -> Result<Self> {
        if !(gamma.is_finite() && gamma > T::zero()) {
            return Err(Error::InvalidInput(format!(
                "gaussian kernel requires gamma > 0 and finite, got {gamma}"
            )));
        }
        Ok(KernelSpec::Gaussian { gamma })
    }

    /// Linear kernel (no parameters).
    pub fn linear() -> Self {
        KernelSpec::Linear
    }

    /// Short lowercase name (`"gaussian"` / `"linear"`), used in model files.
    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Linear => "linear",
        }
    }

    /// Evaluate the kernel on a pair of feature vectors.
    ///
    /// Errors if the two vectors have different lengths.
    pub fn eval(&self, x: ArrayView1<'_, T>, z: ArrayView1<'_, T>) -> Result<T> {
        if x.len() != z.len() {
            return Err(Error::InvalidInput(format!(
                "kernel arguments have mismatched dimensions {} and {}",
                x.len(),
                z.len()
            )));
        }
        Ok(self.eval_unchecked(x, z))
    }

    fn eval_unchecked(&self, x: ArrayView1<'_, T>, z: ArrayView1<'_, T>) -> T {
        match *self {
            KernelSpec::Gaussian { gamma } => {
                let mut sq = T::zero();
                for (&a, &b) in x.iter().zip(z.iter()) {
                    let d = a - b;
                    sq = sq + d * d;
                }
                (-gamma * sq).exp()
            }
            KernelSpec::Linear => {
                let mut dot = T::zero();
                for (&a, &b) in x.iter().zip(z.iter()) {
                    dot = dot + a * b;
                }
                dot
            }
        }
    }

    /// Dense Gram matrix `K[i, j] = k(rows[i], rows[j])`.
    ///
    /// Only the upper triangle is computed; the lower triangle is copied
    /// from it, so `K[i, j]` and `K[j, i]` are identical bits.
    pub fn gram_matrix(&self, rows: ArrayView2<'_, T>) -> Array2<T> {
        let n = rows.nrows();
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = self.eval_unchecked(rows.row(i), rows.row(j));
                k[[i, j]] = v;
                k[[j, i]] = v;
            }
        }
        k
    }

    /// Rectangular cross-kernel `K[i, j] = k(a_rows[i], b_rows[j])`.
    ///
    /// Used for prediction (`a` = query points, `b` = support points) and for
    /// extracting validation blocks during cross-validation.
    pub fn cross_matrix(
        &self,
        a_rows: ArrayView2<'_, T>,
        b_rows: ArrayView2<'_, T>,
    ) -> Result<Array2<T>> {
        if a_rows.ncols() != b_rows.ncols() {
            return Err(Error::InvalidInput(format!(
                "cross kernel matrix requires equal feature dimensions, got {} and {}",
                a_rows.ncols(),
                b_rows.ncols()
            )));
        }
        let mut k = Array2::zeros((a_rows.nrows(), b_rows.nrows()));
        for i in 0..a_rows.nrows() {
            for j in 0..b_rows.nrows() {
                k[[i, j]] = self.eval_unchecked(a_rows.row(i), b_rows.row(j));
            }
        }
        Ok(k)
    }
}

/// Validate that a square matrix is (tolerably) symmetric.
///
/// Matrices built by [`KernelSpec::gram_matrix`] are exactly symmetric;
/// this check exists for matrices supplied from outside. Asymmetry up to
/// `1e-10 * max|K|` is repaired implicitly by callers that only read one
/// triangle; anything larger is rejected.
pub fn check_symmetric<T: Scalar>(k: ArrayView2<'_, T>) -> Result<()> {
    if k.nrows() != k.ncols() {
        return Err(Error::InvalidInput(format!(
            "kernel matrix must be square, got {}x{}",
            k.nrows(),
            k.ncols()
        )));
    }
    let mut scale = T::zero();
    for &v in k.iter() {
        if v.abs() > scale {
            scale = v.abs();
        }
    }
    let tol = crate::scalar::lit::<T>(1e-10) * scale.max(T::one());
    for i in 0..k.nrows() {
        for j in (i + 1)..k.ncols() {
            let diff = (k[[i, j]] - k[[j, i]]).abs();
            if diff > tol {
                return Err(Error::InvalidInput(format!(
                    "kernel matrix is not symmetric at ({i}, {j}): asymmetry {diff}"
                )));
            }
        }
    }
    Ok(())
}
