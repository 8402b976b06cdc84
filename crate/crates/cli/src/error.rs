//! CLI error type and the exit-code policy.
//!
//! Exit codes are part of the command-line contract:
//!
//! * `0` — success,
//! * `1` — runtime failure: I/O while computing or writing results, or a fit
//!   that exhausted its iteration budget without converging,
//! * `2` — input error: bad flags, malformed config/data/model files,
//!   invalid parameter values (clap's own usage errors also exit 2).
//!
//! The boundary is drawn at validation time: everything detected while
//! reading or checking the user's inputs (including output *locations*,
//! which are validated before any long computation starts) is an input
//! error; failures after computation has begun are runtime errors.

use std::fmt;

/// A fatal CLI error, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad user input — exit code 2.
    Input(String),
    /// Runtime failure after inputs were accepted — exit code 1.
    Runtime(String),
}

impl CliError {
    /// The process exit code this error maps to.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Library errors keep their message; only the classification is added.
/// `Io` is the one library variant that can arise after validation (while
/// writing results), so it maps to `Runtime`; everything else the library
/// rejects is a property of the inputs.
impl From<mape_core::Error> for CliError {
    fn from(err: mape_core::Error) -> Self {
        match err {
            mape_core::Error::Io(_) => CliError::Runtime(err.to_string()),
            _ => CliError::Input(err.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_and_codes() {
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
        assert_eq!(CliError::Runtime("x".into()).exit_code(), 1);

        let io = mape_core::Error::Io(std::io::Error::other("disk gone"));
        assert!(matches!(CliError::from(io), CliError::Runtime(_)));

        let bad = mape_core::Error::InvalidInput("nope".into());
        assert!(matches!(CliError::from(bad), CliError::Input(_)));

        let parse = mape_core::Error::ModelParse {
            line: 3,
            message: "junk".into(),
        };
        let err = CliError::from(parse);
        assert!(matches!(&err, CliError::Input(m) if m.contains("line 3")));
    }
}
