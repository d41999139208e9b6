use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A dense operator on `n` sites of local dimension `d`, stored as a
/// `d^n × d^n` complex matrix. Entry `(row, col)` is `⟨row|O|col⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorOperator {
    sites: usize,
    local_dim: usize,
    matrix: DMatrix<Complex64>,
}

impl TensorOperator {
    pub fn new(sites: usize, local_dim: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = local_dim.pow(sites as u32);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::InvalidParams(format!(
                "matrix is {}x{}, expected {dim}x{dim} for {sites} sites of dimension {local_dim}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self {
            sites,
            local_dim,
            matrix,
        })
    }

    pub fn identity(sites: usize, local_dim: usize) -> Self {
        let dim = local_dim.pow(sites as u32);
        Self {
            sites,
            local_dim,
            matrix: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(sites: usize, local_dim: usize) -> Self {
        let dim = local_dim.pow(sites as u32);
        Self {
            sites,
            local_dim,
            matrix: DMatrix::zeros(dim, dim),
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    /// Matrix element with the per-site indices spelled out.
    pub fn entry(&self, out: &[usize], inp: &[usize]) -> Complex64 {
        self.matrix[(self.flat(out), self.flat(inp))]
    }

    pub fn set_entry(&mut self, out: &[usize], inp: &[usize], value: Complex64) {
        let (r, c) = (self.flat(out), self.flat(inp));
        self.matrix[(r, c)] = value;
    }

    fn flat(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.sites);
        digits.iter().fold(0, |acc, &x| {
            debug_assert!(x < self.local_dim);
            acc * self.local_dim + x
        })
    }

    fn digits(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.sites];
        for slot in out.iter_mut().rev() {
            *slot = flat % self.local_dim;
            flat /= self.local_dim;
        }
        out
    }

    /// Embeds this operator into `total_sites` sites; its `k`-th tensor factor
    /// acts on site `positions[k]`, the identity acts elsewhere.
    pub fn embed(&self, positions: &[usize], total_sites: usize) -> TensorOperator {
        assert_eq!(positions.len(), self.sites);
        for (k, &p) in positions.iter().enumerate() {
            assert!(p < total_sites, "site {p} out of range");
            assert!(!positions[..k].contains(&p), "repeated site {p}");
        }
        let d = self.local_dim;
        let mut out = TensorOperator::zeros(total_sites, d);
        let dim = out.dim();
        let local = self.dim();
        for col in 0..dim {
            let digits = out.digits(col);
            let local_in = self.flat(&positions.iter().map(|&p| digits[p]).collect::<Vec<_>>());
            for local_out in 0..local {
                let value = self.matrix[(local_out, local_in)];
                if value == ZERO {
                    continue;
                }
                let mut new = digits.clone();
                for (k, &p) in positions.iter().enumerate() {
                    new[p] = self.digits(local_out)[k];
                }
                let row = out.flat(&new);
                out.matrix[(row, col)] += value;
            }
        }
        out
    }

    /// Transposition in the tensor factor `site`.
    pub fn partial_transpose(&self, site: usize) -> TensorOperator {
        assert!(site < self.sites);
        let mut out = TensorOperator::zeros(self.sites, self.local_dim);
        for row in 0..self.dim() {
            let mut r = self.digits(row);
            for col in 0..self.dim() {
                let value = self.matrix[(row, col)];
                if value == ZERO {
                    continue;
                }
                let mut c = self.digits(col);
                std::mem::swap(&mut r[site], &mut c[site]);
                let (nr, nc) = (self.flat(&r), self.flat(&c));
                out.matrix[(nr, nc)] = value;
                std::mem::swap(&mut r[site], &mut c[site]);
            }
        }
        out
    }

    pub fn compose(&self, rhs: &TensorOperator) -> TensorOperator {
        self.check_shape(rhs);
        TensorOperator {
            sites: self.sites,
            local_dim: self.local_dim,
            matrix: &self.matrix * &rhs.matrix,
        }
    }

    pub fn add(&self, rhs: &TensorOperator) -> TensorOperator {
        self.check_shape(rhs);
        TensorOperator {
            sites: self.sites,
            local_dim: self.local_dim,
            matrix: &self.matrix + &rhs.matrix,
        }
    }

    pub fn scale(&self, factor: Complex64) -> TensorOperator {
        TensorOperator {
            sites: self.sites,
            local_dim: self.local_dim,
            matrix: &self.matrix * factor,
        }
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, rhs: &TensorOperator) -> TensorOperator {
        self.check_shape(rhs);
        TensorOperator {
            sites: self.sites,
            local_dim: self.local_dim,
            matrix: &self.matrix * &rhs.matrix - &rhs.matrix * &self.matrix,
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_shape(&self, rhs: &TensorOperator) {
        assert_eq!(self.sites, rhs.sites, "site count mismatch");
        assert_eq!(self.local_dim, rhs.local_dim, "local dimension mismatch");
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_op(sites: usize, d: usize, seed: u64) -> TensorOperator {
        let dim = d.pow(sites as u32);
        let mut state = seed;
        let m = DMatrix::from_fn(dim, dim, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let a = ((state >> 11) as f64) / (1u64 << 53) as f64 - 0.5;
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let b = ((state >> 11) as f64) / (1u64 << 53) as f64 - 0.5;
            Complex64::new(a, b)
        });
        TensorOperator::new(sites, d, m).unwrap()
    }

    #[test]
    fn embedding_commutes_with_composition() {
        let a = random_op(2, 3, 1);
        let b = random_op(2, 3, 2);
        let lhs = a.compose(&b).embed(&[2, 0], 3);
        let rhs = a.embed(&[2, 0], 3).compose(&b.embed(&[2, 0], 3));
        assert!(lhs.add(&rhs.scale((-1.0).into())).max_abs() < 1e-14);
    }

    #[test]
    fn embedding_places_factors() {
        // |x><y| on one site, embedded at site 1 of 2.
        let mut m = TensorOperator::zeros(1, 3);
        m.set_entry(&[2], &[0], Complex64::new(1.0, 0.0));
        let e = m.embed(&[1], 2);
        for a in 0..3 {
            assert_eq!(e.entry(&[a, 2], &[a, 0]), Complex64::new(1.0, 0.0));
        }
        assert_eq!(e.matrix().iter().filter(|z| z.norm() > 0.0).count(), 3);
    }

    #[test]
    fn partial_transpose_is_involutive() {
        let a = random_op(2, 3, 7);
        for site in 0..2 {
            assert_eq!(a.partial_transpose(site).partial_transpose(site), a);
        }
        let full = a.partial_transpose(0).partial_transpose(1);
        assert_eq!(full.matrix(), &a.matrix().transpose());
    }

    #[test]
    fn shape_is_checked() {
        assert!(TensorOperator::new(2, 3, DMatrix::zeros(8, 8)).is_err());
    }
}
