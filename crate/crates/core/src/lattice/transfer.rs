use num_complex::Complex64;

use super::{r_and_rtilde, r_matrix, ModelParams, TensorOperator};
use crate::error::{Error, Result};
use crate::I;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// One two-site factor of an auxiliary-space product, reshaped as
/// `coupling[((α' d + α) d + p') d + p] = ⟨α' p'|X|α p⟩`.
#[derive(Debug, Clone)]
struct Factor {
    site: usize,
    coupling: Vec<Complex64>,
}

/// `Tr_aux X_1 X_2 ⋯ X_n`, each `X_k` acting on the auxiliary space and one
/// physical site, with every physical site touched at most once. Applied by
/// explicit index contraction, so it never forms the dense operator unless
/// asked to.
#[derive(Debug, Clone)]
pub struct AuxChain {
    local_dim: usize,
    sites: usize,
    factors: Vec<Factor>,
}

impl AuxChain {
    pub fn new(local_dim: usize, sites: usize) -> Self {
        Self {
            local_dim,
            sites,
            factors: Vec::new(),
        }
    }

    /// Appends a two-site operator on the right of the product. `aux_slot`
    /// says which of its two tensor factors is the auxiliary space.
    pub fn push(&mut self, op: &TensorOperator, aux_slot: usize, site: usize) {
        assert_eq!(op.sites(), 2);
        assert_eq!(op.local_dim(), self.local_dim);
        assert!(aux_slot < 2 && site < self.sites);
        assert!(self.factors.iter().all(|f| f.site != site), "site {site} already used");
        let d = self.local_dim;
        let mut coupling = vec![ZERO; d * d * d * d];
        for ao in 0..d {
            for ai in 0..d {
                for po in 0..d {
                    for pi in 0..d {
                        let value = if aux_slot == 0 {
                            op.entry(&[ao, po], &[ai, pi])
                        } else {
                            op.entry(&[po, ao], &[pi, ai])
                        };
                        coupling[((ao * d + ai) * d + po) * d + pi] = value;
                    }
                }
            }
        }
        self.factors.push(Factor { site, coupling });
    }

    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.sites as u32)
    }

    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let d = self.local_dim;
        let dim = self.dim();
        assert_eq!(x.len(), dim);
        // y[(α0 d + α) dim + c]
        let mut y = vec![ZERO; d * d * dim];
        for a0 in 0..d {
            let off = (a0 * d + a0) * dim;
            y[off..off + dim].copy_from_slice(x);
        }
        let mut next = vec![ZERO; d * d * dim];
        for factor in &self.factors {
            let stride = d.pow((self.sites - 1 - factor.site) as u32);
            next.iter_mut().for_each(|z| *z = ZERO);
            for a0 in 0..d {
                for alpha in 0..d {
                    let src = &y[(a0 * d + alpha) * dim..(a0 * d + alpha + 1) * dim];
                    for beta in 0..d {
                        let dst_off = (a0 * d + beta) * dim;
                        let block = &factor.coupling[(alpha * d + beta) * d * d..];
                        for c in 0..dim {
                            let digit = (c / stride) % d;
                            let base = c - digit * stride;
                            let row = &block[digit * d..digit * d + d];
                            let mut acc = ZERO;
                            for (b, w) in row.iter().enumerate() {
                                if *w != ZERO {
                                    acc += w * src[base + b * stride];
                                }
                            }
                            next[dst_off + c] += acc;
                        }
                    }
                }
            }
            std::mem::swap(&mut y, &mut next);
        }
        let mut out = vec![ZERO; dim];
        for a0 in 0..d {
            let off = (a0 * d + a0) * dim;
            for (o, v) in out.iter_mut().zip(&y[off..off + dim]) {
                *o += v;
            }
        }
        out
    }

    pub fn to_dense(&self) -> TensorOperator {
        let dim = self.dim();
        let mut e = vec![ZERO; dim];
        let mut m = TensorOperator::zeros(self.sites, self.local_dim).into_matrix();
        for col in 0..dim {
            e[col] = Complex64::new(1.0, 0.0);
            let column = self.apply(&e);
            e[col] = ZERO;
            for (row, v) in column.into_iter().enumerate() {
                m[(row, col)] = v;
            }
        }
        TensorOperator::new(self.sites, self.local_dim, m).expect("shape")
    }
}

/// Row-to-row transfer matrix `Tr_0 R_{01}(v) R_{02}(v) ⋯ R_{0L}(v)` with the
/// auxiliary space `0` traced out (plain trace).
pub fn row_transfer_chain(v: Complex64, s: usize, sites: usize) -> Result<AuxChain> {
    if sites < 2 {
        return Err(Error::InvalidParams("row transfer needs L >= 2".into()));
    }
    let r = r_matrix(v, s)?;
    let mut chain = AuxChain::new(2 * s + 1, sites);
    for k in 0..sites {
        chain.push(&r, 0, k);
    }
    Ok(chain)
}

pub fn row_transfer(v: Complex64, s: usize, sites: usize) -> Result<TensorOperator> {
    Ok(row_transfer_chain(v, s, sites)?.to_dense())
}

/// Upper limits on the Trotter number for which [`qtm_matrix`] builds a dense
/// operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QtmCaps {
    pub s1: usize,
    pub s2: usize,
    pub other: usize,
}

impl Default for QtmCaps {
    fn default() -> Self {
        Self { s1: 8, s2: 4, other: 2 }
    }
}

impl QtmCaps {
    fn cap(&self, s: usize) -> usize {
        match s {
            1 => self.s1,
            2 => self.s2,
            _ => self.other,
        }
    }
}

/// Quantum transfer matrix as a matrix-free contraction:
/// `Tr_j ∏_{k=1}^{N/2} R_{a_{2k},j}(u+iv) R̃_{a_{2k-1},j}(u-iv)`.
pub fn qtm_chain(v: Complex64, params: &ModelParams) -> Result<AuxChain> {
    let n = params.trotter;
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidParams(format!("Trotter number {n} must be even")));
    }
    let u = Complex64::new(params.u(), 0.0);
    let r = r_matrix(u + I * v, params.s)?;
    let (_, rt) = r_and_rtilde(u - I * v, params.s)?;
    let mut chain = AuxChain::new(params.g(), n);
    for k in 1..=n / 2 {
        chain.push(&r, 1, 2 * k - 1);
        chain.push(&rt, 0, 2 * k - 2);
    }
    Ok(chain)
}

/// Dense quantum transfer matrix, refused above the configured Trotter cap.
pub fn qtm_matrix(v: Complex64, params: &ModelParams, caps: QtmCaps) -> Result<TensorOperator> {
    let cap = caps.cap(params.s);
    if params.trotter > cap {
        return Err(Error::DimensionCap {
            what: "dense quantum transfer matrix",
            requested: params.trotter,
            cap,
        });
    }
    Ok(qtm_chain(v, params)?.to_dense())
}

/// Ungraded cyclic shift `|b_1 b_2 ⋯ b_L⟩ ↦ |b_L b_1 ⋯ b_{L-1}⟩`.
pub fn cyclic_shift(local_dim: usize, sites: usize) -> TensorOperator {
    let mut op = TensorOperator::zeros(sites, local_dim);
    let dim = op.dim();
    let mut digits = vec![0; sites];
    for col in 0..dim {
        let mut rest = col;
        for slot in digits.iter_mut().rev() {
            *slot = rest % local_dim;
            rest /= local_dim;
        }
        let mut out = vec![digits[sites - 1]];
        out.extend_from_slice(&digits[..sites - 1]);
        op.set_entry(&out, &digits, Complex64::new(1.0, 0.0));
    }
    op
}
