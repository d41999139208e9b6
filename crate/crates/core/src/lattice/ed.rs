use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::{dense_eigenvalues_real, local_hamiltonian, GradedIndexSet};
use crate::error::{Error, Result};

/// Largest weight sector diagonalised densely.
const SECTOR_CAP: usize = 3000;

/// The full spectrum of the periodic Hamiltonian on `L` sites.
#[derive(Debug, Clone)]
pub struct FiniteSpectrum {
    pub sites: usize,
    pub energies: Vec<Complex64>,
}

impl FiniteSpectrum {
    pub fn max_imaginary_part(&self) -> f64 {
        self.energies.iter().map(|e| e.im.abs()).fold(0.0, f64::max)
    }

    fn ground(&self) -> f64 {
        self.energies.iter().map(|e| e.re).fold(f64::INFINITY, f64::min)
    }

    fn log_z_shifted(&self, temperature: f64, e0: f64) -> (f64, f64) {
        let mut z = 0.0;
        let mut ez = 0.0;
        for e in &self.energies {
            let w = (-(e.re - e0) / temperature).exp();
            z += w;
            ez += (e.re - e0) * w;
        }
        (z.ln(), ez / z)
    }

    /// `-(T/L) log Tr e^{-H/T}` using the real parts of the energies.
    pub fn free_energy(&self, temperature: f64) -> f64 {
        let e0 = self.ground();
        let (log_z, _) = self.log_z_shifted(temperature, e0);
        (e0 - temperature * log_z) / self.sites as f64
    }

    /// Entropy per site, `(⟨H⟩ - F) / (T L)`.
    pub fn entropy(&self, temperature: f64) -> f64 {
        let e0 = self.ground();
        let (log_z, mean) = self.log_z_shifted(temperature, e0);
        (log_z + mean / temperature) / self.sites as f64
    }
}

/// Spectrum of the periodic chain, block-diagonalised by the conserved
/// additive weight.
pub fn finite_l_spectrum(s: usize, sites: usize, coupling: f64) -> Result<FiniteSpectrum> {
    if sites < 2 {
        return Err(Error::InvalidParams("exact diagonalisation needs L >= 2".into()));
    }
    let set = GradedIndexSet::new(s)?;
    let d = set.dim();
    let full = d.checked_pow(sites as u32);
    let dim = full.filter(|&n| n <= 1 << 26).ok_or(Error::DimensionCap {
        what: "exact diagonalisation Hilbert space",
        requested: full.unwrap_or(usize::MAX),
        cap: 1 << 26,
    })?;

    // Nonzero entries of the bond term, keyed by input pair.
    let h = local_hamiltonian(s);
    let mut bond: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); d * d];
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                for e in 0..d {
                    let x = h.entry(&[c, e], &[a, b]);
                    debug_assert!(x.im == 0.0);
                    if x.re != 0.0 {
                        bond[a * d + b].push((c, e, coupling * x.re));
                    }
                }
            }
        }
    }

    let digits = |mut n: usize| {
        let mut out = vec![0; sites];
        for slot in out.iter_mut().rev() {
            *slot = n % d;
            n /= d;
        }
        out
    };
    let mut sectors: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for state in 0..dim {
        let w: i64 = digits(state).iter().map(|&x| set.weight(x)).sum();
        sectors.entry(w).or_default().push(state);
    }
    if let Some(big) = sectors.values().map(Vec::len).max() {
        if big > SECTOR_CAP {
            return Err(Error::DimensionCap {
                what: "exact diagonalisation sector",
                requested: big,
                cap: SECTOR_CAP,
            });
        }
    }

    let blocks: Vec<Vec<usize>> = sectors.into_values().collect();
    let energies: Vec<Vec<Complex64>> = blocks
        .par_iter()
        .map(|states| {
            let n = states.len();
            let mut m = DMatrix::<f64>::zeros(n, n);
            for (col, &state) in states.iter().enumerate() {
                let ds = digits(state);
                for k in 0..sites {
                    let k2 = (k + 1) % sites;
                    let stride1 = d.pow((sites - 1 - k) as u32);
                    let stride2 = d.pow((sites - 1 - k2) as u32);
                    let base = state - ds[k] * stride1 - ds[k2] * stride2;
                    for &(c, e, x) in &bond[ds[k] * d + ds[k2]] {
                        let target = base + c * stride1 + e * stride2;
                        let row = states.binary_search(&target).expect("weight is conserved");
                        m[(row, col)] += x;
                    }
                }
            }
            dense_eigenvalues_real(&m)
        })
        .collect::<Result<_>>()?;
    Ok(FiniteSpectrum {
        sites,
        energies: energies.into_iter().flatten().collect(),
    })
}

/// Finite-size free energy per site, `f_L = -(T/L) log Tr e^{-H/T}`.
pub fn finite_l_free_energy(s: usize, sites: usize, coupling: f64, temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::InvalidParams("temperature must be positive".into()));
    }
    Ok(finite_l_spectrum(s, sites, coupling)?.free_energy(temperature))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dense_eigenvalues, hamiltonian};

    #[test]
    fn blocks_reproduce_dense_spectrum() {
        for (s, l) in [(1, 4), (2, 3)] {
            let h = hamiltonian(s, l, -1.0, true).unwrap();
            let mut dense: Vec<f64> = dense_eigenvalues(h.matrix()).unwrap().iter().map(|z| z.re).collect();
            let mut blocked: Vec<f64> = finite_l_spectrum(s, l, -1.0)
                .unwrap()
                .energies
                .iter()
                .map(|z| z.re)
                .collect();
            dense.sort_by(f64::total_cmp);
            blocked.sort_by(f64::total_cmp);
            assert_eq!(dense.len(), blocked.len());
            for (a, b) in dense.iter().zip(&blocked) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn zero_coupling() {
        for (s, l) in [(1, 3), (1, 5), (2, 2)] {
            let f = finite_l_free_energy(s, l, 0.0, 1.7).unwrap();
            assert!((f + 1.7 * ((2 * s + 1) as f64).ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn entropy_positive_by_finite_differences() {
        let spec = finite_l_spectrum(1, 5, -1.0).unwrap();
        for t in [0.2, 0.5, 1.0, 2.0, 5.0] {
            let h = 1e-4 * t;
            let s_fd = -(spec.free_energy(t + h) - spec.free_energy(t - h)) / (2.0 * h);
            assert!(s_fd >= 0.0);
            assert!((s_fd - spec.entropy(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn sector_cap() {
        assert!(matches!(
            finite_l_spectrum(1, 10, -1.0),
            Err(Error::DimensionCap { .. })
        ));
    }
}
