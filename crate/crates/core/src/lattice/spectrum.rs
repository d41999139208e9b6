use nalgebra::DMatrix;
use num_complex::Complex64;

use super::TensorOperator;
use crate::error::{Error, Result};

/// Above this dimension [`largest_eigenvalue`] switches from a full dense
/// spectrum to power iteration.
pub const DENSE_SPECTRUM_LIMIT: usize = 2000;

/// All eigenvalues of a dense complex matrix.
pub fn dense_eigenvalues(m: &DMatrix<Complex64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let fm = faer::Mat::<Complex64>::from_fn(n, n, |i, j| m[(i, j)]);
    fm.eigenvalues().map_err(|_| Error::NonConvergence {
        what: "dense eigenvalue solver",
        iterations: 0,
        last_change: f64::NAN,
    })
}

/// All eigenvalues of a dense real matrix.
pub fn dense_eigenvalues_real(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    let fm = faer::Mat::<f64>::from_fn(n, n, |i, j| m[(i, j)]);
    fm.eigenvalues().map_err(|_| Error::NonConvergence {
        what: "dense eigenvalue solver",
        iterations: 0,
        last_change: f64::NAN,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerConfig {
    /// Relative change of the Rayleigh quotient accepted as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_iterations: 100_000,
        }
    }
}

/// Power iteration for the eigenvalue of largest modulus of a linear map
/// given by its action.
pub fn power_iteration<F>(apply: F, dim: usize, config: PowerConfig) -> Result<Complex64>
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
{
    // Deterministic start with components in every direction.
    let mut x: Vec<Complex64> = (0..dim)
        .map(|k| Complex64::new(1.0 + 0.1 * ((k * 7919) % 97) as f64 / 97.0, 0.0))
        .collect();
    normalize(&mut x);
    let mut last = Complex64::new(f64::NAN, 0.0);
    let mut change = f64::INFINITY;
    for _ in 0..config.max_iterations {
        let y = apply(&x);
        let rq: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        change = (rq - last).norm() / rq.norm().max(f64::MIN_POSITIVE);
        // A stationary quotient is not enough when two eigenvalues share the
        // top modulus; the eigen-residual must be small too.
        let converged = change < config.tolerance && {
            let residual: f64 = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (b - rq * a).norm_sqr())
                .sum::<f64>()
                .sqrt();
            residual <= 1e-6 * rq.norm()
        };
        x = y;
        if normalize(&mut x) == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if converged {
            return Ok(rq);
        }
        last = rq;
    }
    Err(Error::NonConvergence {
        what: "power iteration",
        iterations: config.max_iterations,
        last_change: change,
    })
}

fn normalize(x: &mut [Complex64]) -> f64 {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|z| *z /= norm);
    }
    norm
}

/// Eigenvalue of maximal modulus: full spectrum up to
/// [`DENSE_SPECTRUM_LIMIT`], power iteration above.
pub fn largest_eigenvalue(op: &TensorOperator) -> Result<Complex64> {
    let m = op.matrix();
    if m.nrows() <= DENSE_SPECTRUM_LIMIT {
        let ev = dense_eigenvalues(m)?;
        return Ok(ev
            .into_iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or_default());
    }
    power_iteration(
        |x| {
            let v = nalgebra::DVector::from_column_slice(x);
            (m * v).iter().copied().collect()
        },
        m.nrows(),
        PowerConfig::default(),
    )
}
