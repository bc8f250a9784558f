//! Quantum input-output calculus for open networks of Markov components.
//!
//! A component is described in the Itō picture by an SLH triple (scattering
//! operator matrix `S`, coupling vector `L`, Hamiltonian `H`) or in the
//! Stratonovich picture by the interaction coefficients of the singular
//! Hamiltonian; the two are related by a Cayley transform. On top of that
//! sit the generator-matrix algebra of the quantum Itō table, the network
//! composition rules (concatenation, series product, feedback reduction),
//! the parity-graded Fermi variants, master-equation integration for the
//! classical-noise embeddings, and a one-dimensional single-quantum wire
//! realizing the scattering boundary condition.
//!
//! The crate is `no_std` (with `alloc`); everything is dense, double
//! precision, and desk scale.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod fermi;
pub mod linalg;
pub mod network;
pub mod operator;
pub mod slh;
#[cfg(test)]
pub(crate) mod testutil;
pub mod wire;

pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use operator::{BracketKind, MatrixProperty, Operator, PropertyReport, C64, DEFAULT_TOL};
pub use slh::{
    ito_product, ito_to_stratonovich, stratonovich_to_ito, GeneratorMatrix, LangevinCoefficients,
    SLHTriple, StratonovichCoefficients,
};
