//! Finite-temperature thermodynamics of the `osp(1|2s)` integrable spin chain.
//!
//! The crate is organised around the chain of objects that lead from the
//! lattice model to the free energy:
//!
//! * [`lattice`] builds the graded R-matrix, the Hamiltonian, row-to-row and
//!   quantum transfer matrices as dense operators, and supplies small-size
//!   spectral oracles (exact diagonalisation, largest QTM eigenvalue).
//! * [`bethe`] evaluates the dressed vacuum form of the QTM eigenvalues, the
//!   Bethe ansatz equations and the two-string root configuration.
//! * [`qsystem`] holds the exact asymptotic constants `Q^(a)_m`.
//! * [`nlie`] solves the closed `m = 1` system of nonlinear integral equations
//!   on circular contours and derives free energy, entropy and specific heat.
//! * [`hte`] runs the exact-rational high-temperature expansion (`s = 1`).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bethe;
pub mod error;
pub mod hte;
pub mod lattice;
pub mod nlie;
pub mod qsystem;
pub mod rational;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// The imaginary unit.
pub const I: Complex64 = Complex64::new(0.0, 1.0);
