//! Error type shared by every module of the crate.

use alloc::string::String;
use core::fmt;

/// Everything that can go wrong while building or transforming a model.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A matrix contained NaN or infinite entries.
    NonFinite { context: &'static str },
    /// Two operators (or an operator and a state) live on different spaces.
    DimensionMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },
    /// A tensor product or joint space would exceed the dimension cap.
    DimensionLimit { requested: usize, limit: usize },
    /// Channel counts of two components disagree.
    ChannelMismatch { left: usize, right: usize },
    /// Malformed construction input (ragged matrix, wrong block count, ...).
    Shape { message: String },
    /// `1 + (i/2)E` is numerically singular in the Stratonovich-to-Itō map.
    SingularTransform { condition: f64 },
    /// `1 + S` is singular: the triple has no Stratonovich form.
    NoStratonovichForm { condition: f64 },
    /// `1 - S_{s0 r0}` is singular: the feedback loop is algebraic.
    AlgebraicLoop {
        condition: f64,
        edge: Option<String>,
    },
    /// A channel permutation is not a permutation.
    InvalidPermutation { message: String },
    /// A network spec references unknown ports or wires a port twice.
    Network { message: String },
    /// A Fermi composition was handed coefficients of the wrong parity.
    ParityViolation { message: String },
    /// The supplied parity operator is not a Hermitian involution.
    InvalidParityOperator { deviation: f64 },
    /// An operator required to be Hermitian is not.
    NonHermitian {
        context: &'static str,
        deviation: f64,
    },
    /// An operator required to be unitary is not.
    NonUnitary {
        context: &'static str,
        deviation: f64,
    },
    /// A rate or step that must be positive is not.
    NonPositive { what: &'static str, value: f64 },
    /// Polynomial coefficients exceed the supported degree.
    PolynomialDegree { terms: usize, max_terms: usize },
    /// Oscillator truncation below the supported minimum.
    TruncationTooSmall { requested: usize, minimum: usize },
    /// More fermionic modes requested than the configured cap.
    ModeCapExceeded { requested: usize, cap: usize },
    /// A density matrix violates Hermiticity, unit trace, or positivity.
    InvalidState { message: String, deviation: f64 },
    /// Master-equation integration left the physical manifold.
    Diverged { time: f64, message: String },
    /// A wave packet reached the edge of the wire grid.
    DomainExit { step: usize },
    /// Propagation time is not a multiple of the grid spacing.
    NotMultipleOfStep { time: f64, step: f64 },
    /// Undamped resonance: the transfer function has a pole at this frequency.
    Pole { omega: f64 },
    /// A model invariant (S unitary, H Hermitian, ...) fails beyond tolerance.
    Invariant { message: String, deviation: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite { context } => {
                write!(f, "non-finite entries in {context}")
            }
            Error::DimensionMismatch {
                left,
                right,
                context,
            } => write!(f, "dimension mismatch in {context}: {left} vs {right}"),
            Error::DimensionLimit { requested, limit } => {
                write!(f, "dimension {requested} exceeds the limit {limit}")
            }
            Error::ChannelMismatch { left, right } => {
                write!(f, "channel count mismatch: {left} vs {right}")
            }
            Error::Shape { message } => write!(f, "{message}"),
            Error::SingularTransform { condition } => write!(
                f,
                "1 + (i/2)E is numerically singular (condition estimate {condition:.3e})"
            ),
            Error::NoStratonovichForm { condition } => write!(
                f,
                "1 + S is numerically singular, no Stratonovich form (condition estimate {condition:.3e})"
            ),
            Error::AlgebraicLoop { condition, edge } => match edge {
                Some(edge) => write!(
                    f,
                    "algebraic loop eliminating {edge}: 1 - S_loop is singular (condition estimate {condition:.3e})"
                ),
                None => write!(
                    f,
                    "algebraic loop: 1 - S_loop is singular (condition estimate {condition:.3e})"
                ),
            },
            Error::InvalidPermutation { message } => write!(f, "{message}"),
            Error::Network { message } => write!(f, "{message}"),
            Error::ParityViolation { message } => write!(f, "{message}"),
            Error::InvalidParityOperator { deviation } => write!(
                f,
                "parity operator is not a Hermitian involution (deviation {deviation:.3e})"
            ),
            Error::NonHermitian { context, deviation } => {
                write!(f, "{context} must be Hermitian (deviation {deviation:.3e})")
            }
            Error::NonUnitary { context, deviation } => {
                write!(f, "{context} must be unitary (deviation {deviation:.3e})")
            }
            Error::NonPositive { what, value } => {
                write!(f, "{what} must be positive, got {value}")
            }
            Error::PolynomialDegree { terms, max_terms } => write!(
                f,
                "polynomial has {terms} coefficients, at most {max_terms} supported"
            ),
            Error::TruncationTooSmall { requested, minimum } => write!(
                f,
                "oscillator truncation {requested} below the minimum {minimum}"
            ),
            Error::ModeCapExceeded { requested, cap } => {
                write!(f, "{requested} fermionic modes exceed the cap {cap}")
            }
            Error::InvalidState { message, deviation } => {
                write!(f, "{message} (deviation {deviation:.3e})")
            }
            Error::Diverged { time, message } => {
                write!(f, "integration diverged at t = {time}: {message}")
            }
            Error::DomainExit { step } => write!(
                f,
                "wave packet reached the grid boundary at step {step}"
            ),
            Error::NotMultipleOfStep { time, step } => write!(
                f,
                "propagation time {time} is not a multiple of the grid spacing {step}"
            ),
            Error::Pole { omega } => {
                write!(f, "transfer function has a pole at omega = {omega}")
            }
            Error::Invariant { message, deviation } => {
                write!(f, "{message} (deviation {deviation:.3e})")
            }
        }
    }
}

impl core::error::Error for Error {}
