//! Kernel regression under the mean absolute percentage error.
//!
//! This crate fits nonparametric regression models that minimize **MAPE**
//! (mean absolute percentage error) — as well as MAE and general pinball
//! losses — by solving the equivalent kernel quantile-regression dual with
//! per-sample box constraints. It also ships the analysis tools the loss
//! itself calls for: the pointwise MAPE minimizer of a discrete
//! distribution, a diagnostic for whether the MAPE risk of a target
//! distribution is even finite, and a simulation harness that contrasts
//! MAPE-optimal with MAE-optimal fits on a noisy sinc family.
//!
//! # Quick start
//!
//! ```
//! use mape_core::{Dataset64, KernelSpec64, LossSpec64};
//! use mape_core::regressor::fit;
//! use ndarray::array;
//!
//! // Four samples of a noisy line, all targets safely away from zero.
//! let x = array![[0.0], [1.0], [2.0], [3.0]];
//! let y = vec![1.0, 2.1, 2.9, 4.2];
//! let data = Dataset64::new(x, y)?;
//!
//! let model = fit(
//!     &data,
//!     LossSpec64::mape(),
//!     KernelSpec64::gaussian(0.5)?,
//!     10.0,
//! )?;
//! let predictions = model.predict(array![[1.5]].view())?;
//! assert!((predictions[0] - 2.5).abs() < 0.5);
//! # Ok::<(), mape_core::Error>(())
//! ```
//!
//! # Module map
//!
//! * [`loss`] — loss values and empirical risk (MAPE / MAE / pinball).
//! * [`quantile`] — weighted quantiles of finite samples.
//! * [`dist`] — discrete distributions and their pointwise MAPE minimizer.
//! * [`finiteness`] — tail diagnostic: is the optimal MAPE risk finite?
//! * [`kernel`] — Gaussian and linear kernels, Gram matrices.
//! * [`qp`] — the dual box QP and its SMO solver.
//! * [`regressor`] — fit / predict / cross-validation.
//! * [`model_io`] — 17-digit exact text persistence for trained models.
//! * [`simulation`] — the translated-sinc experiment harness.
//! * [`rng`] — deterministic SplitMix64 streams for simulations.
//!
//! Numeric code is generic over [`Scalar`] (any IEEE float; `f64` and `f32`
//! are the intended instantiations), with `f64` aliases exported at the
//! crate root.

pub mod dist;
pub mod error;
pub mod finiteness;
pub mod kernel;
pub mod loss;
pub mod model_io;
pub mod qp;
pub mod quantile;
pub mod regressor;
pub mod rng;
mod scalar;
pub mod simulation;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision [`regressor::Dataset`].
pub type Dataset64 = regressor::Dataset<f64>;
/// Double-precision [`regressor::TrainedModel`].
pub type TrainedModel64 = regressor::TrainedModel<f64>;
/// Double-precision [`regressor::CvReport`].
pub type CvReport64 = regressor::CvReport<f64>;
/// Double-precision [`loss::LossSpec`].
pub type LossSpec64 = loss::LossSpec<f64>;
/// Double-precision [`kernel::KernelSpec`].
pub type KernelSpec64 = kernel::KernelSpec<f64>;
/// Double-precision [`simulation::SimConfig`].
pub type SimConfig64 = simulation::SimConfig<f64>;
