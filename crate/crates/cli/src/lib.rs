//! Library behind the `errdist` binary: scenario loading, the four
//! subcommands and their CSV output.

pub mod commands;
pub mod parse;
pub mod scenario;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),

    #[error("numerical consistency error: {0}")]
    Numerical(String),

    /// A universal relation came out unsatisfied; the CSV is still written.
    #[error("relation violated: {0}")]
    Violation(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Violation(_) => 1,
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    /// Same kind of error with `prefix: ` in front of the message.
    pub fn context(self, prefix: impl std::fmt::Display) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("{prefix}: {m}")),
            CliError::Numerical(m) => CliError::Numerical(format!("{prefix}: {m}")),
            CliError::Violation(m) => CliError::Violation(format!("{prefix}: {m}")),
        }
    }
}

impl From<errdist::Error> for CliError {
    fn from(e: errdist::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Violation("x".into()).exit_code(), 1);
        assert_eq!(CliError::Input("x".into()).exit_code(), 2);
        assert_eq!(CliError::Numerical("x".into()).exit_code(), 3);
        let numerical: CliError = errdist::Error::Numerical {
            what: "t".into(),
            residual: 1.0,
        }
        .into();
        assert_eq!(numerical.exit_code(), 3);
        let input: CliError = errdist::Error::NotHermitian(1.0).into();
        assert_eq!(input.exit_code(), 2);
        assert_eq!(
            input.context("line 3").to_string(),
            "input error: line 3: operator is not Hermitian (max |O - O†| = 1e0)"
        );
    }
}
