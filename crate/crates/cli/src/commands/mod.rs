//! Subcommand implementations and the flag groups they share.
//!
//! Every option that models or the solver understand exists in three layers:
//! an explicit flag beats a config-file key, which beats the built-in
//! default. Flags that make sense only in combination (`--tau` without the
//! pinball loss, `--gamma` with the linear kernel) are rejected when given
//! *explicitly*; the same keys appearing in a shared config file are simply
//! ignored by commands they don't apply to, so one config can serve several
//! subcommands.

pub mod cross_validate;
pub mod diagnose;
pub mod fit;
pub mod predict;
pub mod simulate;

use clap::Args;
use mape_core::loss::LossKind;
use mape_core::regressor::{default_c_grid, FitOptions};
use mape_core::{KernelSpec64, LossSpec64};

use crate::config::{parse_float_list, ConfigFile};
use crate::error::CliError;

/// Loss and kernel selection, shared by `fit` and `cross-validate`.
#[derive(Args, Debug)]
pub struct ModelArgs {
    /// Loss to fit: mape, mae or pinball [default: mape]
    #[arg(long)]
    pub loss: Option<String>,

    /// Quantile level in (0, 1); only valid with --loss pinball
    #[arg(long)]
    pub tau: Option<f64>,

    /// Kernel: gaussian or linear [default: gaussian]
    #[arg(long)]
    pub kernel: Option<String>,

    /// Gaussian kernel width; only valid with --kernel gaussian [default: 1]
    #[arg(long)]
    pub gamma: Option<f64>,
}

/// Dual-solver knobs, shared by every command that fits models.
#[derive(Args, Debug)]
pub struct SolverArgs {
    /// Solver KKT tolerance [default: 1e-6]
    #[arg(long)]
    pub tol: Option<f64>,

    /// Solver iteration budget [default: 100 * n^2]
    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Smallest |target| accepted by MAPE fitting [default: 1e-8]
    #[arg(long)]
    pub y_min: Option<f64>,
}

/// Resolve the loss specification from flags, config and defaults.
pub fn build_loss(args: &ModelArgs, cfg: &ConfigFile) -> Result<LossSpec64, CliError> {
    let name = match &args.loss {
        Some(s) => s.clone(),
        None => cfg.get("loss").unwrap_or("mape").to_string(),
    };
    let kind = LossKind::parse(&name)?;
    match kind {
        LossKind::Mape | LossKind::Mae => {
            if args.tau.is_some() {
                return Err(CliError::Input(format!(
                    "--tau only applies to the pinball loss (the loss here is {name})"
                )));
            }
            Ok(match kind {
                LossKind::Mape => LossSpec64::mape(),
                _ => LossSpec64::mae(),
            })
        }
        LossKind::Pinball => {
            let tau = cfg.resolve(args.tau, "tau")?.ok_or_else(|| {
                CliError::Input("--loss pinball requires --tau (or config key `tau`)".into())
            })?;
            Ok(LossSpec64::pinball(tau)?)
        }
    }
}

/// Resolve the kernel from flags, config and defaults. `default_gamma` is
/// the fallback width when the gaussian kernel is chosen without `gamma`
/// anywhere.
pub fn build_kernel(
    args: &ModelArgs,
    cfg: &ConfigFile,
    default_gamma: f64,
) -> Result<KernelSpec64, CliError> {
    let name = match &args.kernel {
        Some(s) => s.clone(),
        None => cfg.get("kernel").unwrap_or("gaussian").to_string(),
    };
    match name.as_str() {
        "gaussian" => {
            let gamma = cfg.resolve(args.gamma, "gamma")?.unwrap_or(default_gamma);
            Ok(KernelSpec64::gaussian(gamma)?)
        }
        "linear" => {
            if args.gamma.is_some() {
                return Err(CliError::Input(
                    "--gamma only applies to the gaussian kernel".into(),
                ));
            }
            Ok(KernelSpec64::linear())
        }
        other => Err(CliError::Input(format!(
            "unknown kernel `{other}` (expected gaussian or linear)"
        ))),
    }
}

/// Fold solver flags and config keys into [`FitOptions`], starting from the
/// library defaults.
pub fn build_fit_options(args: &SolverArgs, cfg: &ConfigFile) -> Result<FitOptions<f64>, CliError> {
    let mut options = FitOptions::default();
    if let Some(tol) = cfg.resolve(args.tol, "tol")? {
        options.tol = tol;
    }
    if let Some(max_iter) = cfg.resolve(args.max_iter, "max_iter")? {
        options.max_iter = Some(max_iter);
    }
    if let Some(y_min) = cfg.resolve(args.y_min, "y_min")? {
        options.y_min = y_min;
    }
    Ok(options)
}

/// Resolve the cross-validation C grid (flag, config, or the library
/// default grid).
pub fn resolve_c_grid(flag: Option<String>, cfg: &ConfigFile) -> Result<Vec<f64>, CliError> {
    let raw = match flag {
        Some(s) => Some(s),
        None => cfg.get("c_grid").map(str::to_string),
    };
    match raw {
        Some(s) => parse_float_list(&s, "--c-grid"),
        None => Ok(default_c_grid()),
    }
}

/// Human-readable loss name for summary lines (`mape`, `mae`,
/// `pinball(tau=0.3)`).
pub fn loss_label(loss: &LossSpec64) -> String {
    match loss.kind() {
        LossKind::Pinball => format!("pinball(tau={})", loss.tau()),
        kind => kind.name().to_string(),
    }
}
