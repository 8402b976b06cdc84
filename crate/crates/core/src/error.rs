//! Error type shared by every fallible operation in the crate.

use std::fmt;
use std::io;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the library.
///
/// Numerical non-convergence is deliberately *not* an error: solvers report it
/// through their returned diagnostics so that hyper-parameter searches can
/// survive hard instances.
#[derive(Debug)]
pub enum Error {
    /// Invalid arguments: dimension mismatches, out-of-range parameters,
    /// malformed structured input.
    InvalidInput(String),
    /// Relative-error (MAPE) fitting rejected because a target is too close to
    /// zero: the dual box bounds scale like 1/y² and become meaningless.
    TargetNearZero {
        /// Row index of the offending sample.
        index: usize,
        /// The offending target value (widened to `f64` for display).
        value: f64,
        /// The guard threshold that was violated.
        y_min: f64,
    },
    /// Underlying I/O failure while reading or writing a file.
    Io(io::Error),
    /// Structured parse failure in a model file, with a 1-based line number.
    ModelParse { line: usize, message: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(msg) => write!(f, "invalid input: {msg}"),
            Error::TargetNearZero {
                index,
                value,
                y_min,
            } => write!(
                f,
                "target at row {index} has |y| = {:e} below the y_min guard {y_min:e}; \
                 relative-error fitting requires targets bounded away from zero",
                value.abs()
            ),
            Error::Io(err) => write!(f, "i/o error: {err}"),
            Error::ModelParse { line, message } => {
                write!(f, "model file parse error at line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(err) => Some(err),
            _ => None,
        }
    }
}

impl From<io::Error> for Error {
    fn from(err: io::Error) -> Self {
        Error::Io(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_names_the_offending_row() {
        let err = Error::TargetNearZero {
            index: 7,
            value: -1e-12,
            y_min: 1e-8,
        };
        let text = err.to_string();
        assert!(text.contains("row 7"), "{text}");
        assert!(text.contains("1e-8"), "{text}");
    }

    #[test]
    fn io_errors_carry_a_source() {
        use std::error::Error as _;
        let err = Error::from(io::Error::new(io::ErrorKind::NotFound, "gone"));
        assert!(err.source().is_some());
    }
}
