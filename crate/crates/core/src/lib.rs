//! Effective Hamiltonians and three-factor decompositions for linear
//! quantum-optical networks.
//!
//! A network acting on `n` modes is described by a `2n x 2n` scattering
//! matrix mapping the stacked mode operators `(a_1..a_n, a_1^+..a_n^+)` of
//! the incident light onto those of the outgoing light. Components `0..n`
//! are annihilators and `n..2n` are creators throughout the crate.
//!
//! * [`group`] validates scattering matrices and Lie-algebra generators.
//! * [`logm`] takes matrix logarithms and decides whether a single
//!   effective Hamiltonian exists.
//! * [`hamiltonian`] maps generators to Hermitian coefficient matrices.
//! * [`blochmessiah`] factors any scattering matrix into
//!   passive x squeezer x passive.
//! * [`elements`] builds the standard devices.
//! * [`fock`] realizes everything on a truncated Fock space and checks the
//!   Heisenberg-picture mode transformation directly.

pub mod blochmessiah;
pub mod elements;
mod error;
pub mod fock;
pub mod group;
pub mod hamiltonian;
pub mod io;
pub mod linalg;
pub mod logm;

pub use error::{Error, Result};
pub use group::{FormClass, Generator, Metric, ScatteringMatrix, ValidationReport};
pub use linalg::{ComplexMatrix, C64};

/// Absolute residual tolerance used when callers do not supply one.
pub const DEFAULT_TOL: f64 = 1e-10;
