use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical and exact routines of this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("pole of {what} at {at}")]
    Pole { what: &'static str, at: Complex64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension cap exceeded: {what} needs {requested}, cap is {cap}")]
    DimensionCap {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("{what} did not converge after {iterations} iterations (last change {last_change:e})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last_change: f64,
    },

    #[error("evaluation point {at} too close to the kernel pole of term {term} (|w| = {distance:e})")]
    KernelCollision { at: Complex64, term: usize, distance: f64 },

    #[error("|T^({label})| = {magnitude:e} at a quadrature node; division guard tripped")]
    DivisionBlowup { label: usize, magnitude: f64 },

    #[error("logarithm argument {0} is not real positive")]
    NonPositiveLog(Complex64),

    #[error("inconsistent linear system at order {order}: {detail}")]
    Inconsistent { order: usize, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
