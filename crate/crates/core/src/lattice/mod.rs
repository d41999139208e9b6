//! The lattice model: graded local spaces, R-matrices, Hamiltonian, transfer
//! matrices and small-size spectral oracles.
//!
//! Basis convention: the labels `1 ≺ 2 ≺ … ≺ s ≺ 0 ≺ s̄ ≺ … ≺ 1̄` map to the
//! indices `0..2s` in that order. In a tensor product the leftmost site is the
//! most significant digit of the flat index.

mod ed;
mod hamiltonian;
mod operator;
mod rmatrix;
mod spectrum;
mod transfer;

use std::fmt;

use crate::error::{Error, Result};

pub use ed::{finite_l_free_energy, finite_l_spectrum, FiniteSpectrum};
pub use hamiltonian::{hamiltonian, local_hamiltonian};
pub use operator::TensorOperator;
pub use rmatrix::{build_alpha, build_e, build_p, r_and_rtilde, r_check, r_matrix};
pub use spectrum::{dense_eigenvalues, dense_eigenvalues_real, largest_eigenvalue, power_iteration, PowerConfig};
pub use transfer::{cyclic_shift, qtm_matrix, row_transfer, AuxChain, QtmCaps};

/// A label of the local space: `Plain(a)` is `a`, `Bar(a)` is `ā`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Plain(usize),
    Zero,
    Bar(usize),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Plain(a) => write!(f, "{a}"),
            Label::Zero => write!(f, "0"),
            Label::Bar(a) => write!(f, "{a}\u{0304}"),
        }
    }
}

/// The ordered, graded label set of the `(2s+1)`-dimensional fundamental
/// representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GradedIndexSet {
    s: usize,
}

impl GradedIndexSet {
    pub fn new(s: usize) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParams("rank s must be at least 1".into()));
        }
        Ok(Self { s })
    }

    pub fn rank(&self) -> usize {
        self.s
    }

    /// `g = 2s + 1`, the local dimension.
    pub fn dim(&self) -> usize {
        2 * self.s + 1
    }

    pub fn label(&self, index: usize) -> Label {
        assert!(index < self.dim(), "index {index} out of range");
        match index.cmp(&self.s) {
            std::cmp::Ordering::Less => Label::Plain(index + 1),
            std::cmp::Ordering::Equal => Label::Zero,
            std::cmp::Ordering::Greater => Label::Bar(2 * self.s + 1 - index),
        }
    }

    pub fn index(&self, label: Label) -> usize {
        match label {
            Label::Plain(a) => {
                assert!((1..=self.s).contains(&a));
                a - 1
            }
            Label::Zero => self.s,
            Label::Bar(a) => {
                assert!((1..=self.s).contains(&a));
                2 * self.s + 1 - a
            }
        }
    }

    /// Parity `p(a)`: 0 for the label `0`, 1 for every other label.
    pub fn parity(&self, index: usize) -> u8 {
        u8::from(index != self.s)
    }

    /// The involution `a ↦ ā`.
    pub fn bar(&self, index: usize) -> usize {
        self.dim() - 1 - index
    }

    /// Strict order `≺` on indices (the basis order is the label order).
    pub fn precedes(&self, i: usize, j: usize) -> bool {
        i < j
    }

    /// Additive weight conserved by the Hamiltonian: `+(s+1-a)` for `a`,
    /// `0` for `0`, `-(s+1-a)` for `ā`.
    pub fn weight(&self, index: usize) -> i64 {
        self.s as i64 - index as i64
    }
}

/// Physical and discretisation parameters of one thermodynamic point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub s: usize,
    pub coupling: f64,
    pub temperature: f64,
    pub trotter: usize,
    pub sites: usize,
}

impl ModelParams {
    pub fn new(s: usize, coupling: f64, temperature: f64) -> Result<Self> {
        Self::with_discretisation(s, coupling, temperature, 2, 2)
    }

    pub fn with_discretisation(
        s: usize,
        coupling: f64,
        temperature: f64,
        trotter: usize,
        sites: usize,
    ) -> Result<Self> {
        if s == 0 {
            return Err(Error::InvalidParams("rank s must be at least 1".into()));
        }
        if !(temperature > 0.0) || !temperature.is_finite() {
            return Err(Error::InvalidParams(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        if !coupling.is_finite() {
            return Err(Error::InvalidParams("coupling must be finite".into()));
        }
        if trotter == 0 || trotter % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "Trotter number must be even and positive, got {trotter}"
            )));
        }
        Ok(Self {
            s,
            coupling,
            temperature,
            trotter,
            sites,
        })
    }

    pub fn g(&self) -> usize {
        2 * self.s + 1
    }

    /// Spectral shift `u = -J / (T N)`.
    pub fn u(&self) -> f64 {
        -self.coupling / (self.temperature * self.trotter as f64)
    }
}
