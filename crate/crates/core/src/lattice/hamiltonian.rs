use num_complex::Complex64;

use super::{build_e, build_p, TensorOperator};
use crate::error::{Error, Result};

/// Largest dense Hamiltonian built on request.
const DENSE_DIM_CAP: usize = 4096;

/// Two-site density `P + (2/g) E` (without the coupling).
pub fn local_hamiltonian(s: usize) -> TensorOperator {
    let g = (2 * s + 1) as f64;
    build_p(s).add(&build_e(s).scale(Complex64::new(2.0 / g, 0.0)))
}

/// `H = J Σ_k (P + (2/g) E)_{k,k+1}`; with `periodic` the last bond joins
/// site `L-1` back to site `0`.
pub fn hamiltonian(s: usize, sites: usize, coupling: f64, periodic: bool) -> Result<TensorOperator> {
    if sites < 2 {
        return Err(Error::InvalidParams("Hamiltonian needs L >= 2".into()));
    }
    let g = 2 * s + 1;
    let dim = g.checked_pow(sites as u32).unwrap_or(usize::MAX);
    if dim > DENSE_DIM_CAP {
        return Err(Error::DimensionCap {
            what: "dense Hamiltonian dimension",
            requested: dim,
            cap: DENSE_DIM_CAP,
        });
    }
    let h = local_hamiltonian(s);
    let bonds = if periodic { sites } else { sites - 1 };
    let mut out = TensorOperator::zeros(sites, g);
    for k in 0..bonds {
        out = out.add(&h.embed(&[k, (k + 1) % sites], sites));
    }
    Ok(out.scale(Complex64::new(coupling, 0.0)))
}
