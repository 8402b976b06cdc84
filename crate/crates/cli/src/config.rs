//! Flat `key=value` config files and flag/config/default resolution.
//!
//! A config file supplies defaults for any command; command-line flags
//! override it, and built-in defaults fill whatever remains. The format is
//! deliberately minimal and diff-friendly:
//!
//! ```text
//! # comment lines start with '#'; blank lines are ignored
//! loss=mape
//! kernel=gaussian
//! gamma=10
//! c_grid=0.1,1,10
//! data=train.csv
//! ```
//!
//! Keys are validated strictly against the known set (a typo in a key is an
//! input error, not a silent no-op), and a key may appear at most once. A
//! single file may carry keys for several commands; each command reads only
//! the keys it understands.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::CliError;

/// Every key any command understands, sorted. One shared namespace: config
/// files are reusable across subcommands, and unknown keys are rejected.
pub const KNOWN_KEYS: &[&str] = &[
    "a_list",       // simulate: comma-separated translation values
    "c",            // fit: regularization constant (omit to cross-validate)
    "c_grid",       // fit/cross-validate/simulate: comma-separated C grid
    "data",         // fit/predict/cross-validate: data CSV path
    "folds",        // fit/cross-validate/simulate: CV fold count
    "gamma",        // Gaussian kernel width
    "k",            // diagnose: number of tail terms
    "kernel",       // fit/cross-validate: gaussian | linear
    "loss",         // fit/cross-validate: mape | mae | pinball
    "mape_floor",   // simulate: |y| floor for headline test MAPE
    "mass_at_zero", // diagnose: P(T = 0)
    "max_iter",     // solver iteration budget
    "model",        // predict: model file path
    "n_test",       // simulate: test-set size
    "n_train",      // simulate: training-set size
    "out",          // fit/predict: output file path
    "out_dir",      // simulate: output directory
    "seed",         // fit/cross-validate/simulate: PRNG seed
    "tail",         // diagnose: linear | quadratic | csv:<path>
    "tau",          // pinball quantile level
    "tol",          // solver KKT tolerance
    "y_min",        // MAPE guard: reject |y| below this
];

/// A parsed config file (possibly empty when no `--config` was given).
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// The empty config: every lookup misses.
    pub fn empty() -> Self {
        ConfigFile::default()
    }

    /// Load and strictly validate a config file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Input(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Input(format!(
                    "config file {}: line {}: expected key=value, got `{line}`",
                    path.display(),
                    i + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::Input(format!(
                    "config file {}: line {}: unknown key `{key}` (known keys: {})",
                    path.display(),
                    i + 1,
                    KNOWN_KEYS.join(", ")
                )));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Input(format!(
                    "config file {}: line {}: duplicate key `{key}`",
                    path.display(),
                    i + 1
                )));
            }
        }
        Ok(ConfigFile { values })
    }

    /// Raw value for `key`, if the file set it.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the config value parsed as `T`, else `None`.
    pub fn resolve<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.get(key) {
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::Input(format!("config key `{key}`: cannot parse `{raw}`: {e}"))
            }),
            None => Ok(None),
        }
    }

    /// Like [`ConfigFile::resolve`] for path-valued keys.
    pub fn resolve_path(&self, flag: Option<PathBuf>, key: &str) -> Option<PathBuf> {
        flag.or_else(|| self.get(key).map(PathBuf::from))
    }

    /// Resolve a required path: flag, else config, else an input error
    /// naming both spellings.
    pub fn require_path(
        &self,
        flag: Option<PathBuf>,
        key: &str,
        flag_name: &str,
    ) -> Result<PathBuf, CliError> {
        self.resolve_path(flag, key)
            .ok_or_else(|| CliError::Input(format!("missing {flag_name} (or config key `{key}`)")))
    }
}

/// Parse a comma-separated float list (`"0.1, 1, 10"`). Used by `--c-grid`
/// and `--a-list` and their config keys; `what` names the offender in errors.
pub fn parse_float_list(raw: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let items: Vec<&str> = raw.split(',').map(str::trim).collect();
    if items.iter().all(|s| s.is_empty()) {
        return Err(CliError::Input(format!("{what}: empty list `{raw}`")));
    }
    items
        .into_iter()
        .map(|s| {
            s.parse::<f64>().map_err(|_| {
                CliError::Input(format!("{what}: cannot parse `{s}` as a number in `{raw}`"))
            })
        })
        .collect()
}
