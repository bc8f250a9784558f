//! CLI error envelope: every failure carries a machine-parseable class
//! (printed as `CLASS: message` on stderr) and a process exit code,
//! 2 for model or usage problems, 3 for numerical failures.

use std::fmt;

use slh_core::Error as CoreError;

#[derive(Debug)]
pub struct CliError {
    pub class: &'static str,
    pub exit_code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            class: "USAGE",
            exit_code: 2,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            class: "IO",
            exit_code: 2,
            message: message.into(),
        }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        CliError {
            class: "PARSE",
            exit_code: 2,
            message: message.into(),
        }
    }

    pub fn shape(message: impl Into<String>) -> Self {
        CliError {
            class: "SHAPE",
            exit_code: 2,
            message: message.into(),
        }
    }

    pub fn invariant(message: impl Into<String>) -> Self {
        CliError {
            class: "INVARIANT",
            exit_code: 2,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.class, self.message)
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let (class, exit_code) = match &err {
            CoreError::NonFinite { .. }
            | CoreError::DimensionMismatch { .. }
            | CoreError::ChannelMismatch { .. }
            | CoreError::Shape { .. }
            | CoreError::InvalidPermutation { .. } => ("SHAPE", 2),
            CoreError::DimensionLimit { .. }
            | CoreError::PolynomialDegree { .. }
            | CoreError::TruncationTooSmall { .. }
            | CoreError::ModeCapExceeded { .. } => ("DIMENSION", 2),
            CoreError::Network { .. }
            | CoreError::ParityViolation { .. }
            | CoreError::InvalidParityOperator { .. }
            | CoreError::NonHermitian { .. }
            | CoreError::NonUnitary { .. }
            | CoreError::NonPositive { .. }
            | CoreError::InvalidState { .. }
            | CoreError::Invariant { .. } => ("INVARIANT", 2),
            CoreError::NotMultipleOfStep { .. } => ("USAGE", 2),
            CoreError::SingularTransform { .. } | CoreError::NoStratonovichForm { .. } => {
                ("SINGULAR", 3)
            }
            CoreError::AlgebraicLoop { .. } => ("LOOP", 3),
            CoreError::Diverged { .. } => ("DIVERGED", 3),
            CoreError::DomainExit { .. } => ("DOMAIN", 3),
            CoreError::Pole { .. } => ("POLE", 3),
        };
        CliError {
            class,
            exit_code,
            message: err.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
