use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{GradedIndexSet, TensorOperator};
use crate::error::{Error, Result};

/// The anti-diagonal form `α` with `α_{a,ā} = +1` for `a ∈ {1,…,s,0}` and `-1`
/// for barred `a`.
pub fn build_alpha(s: usize) -> DMatrix<f64> {
    let set = GradedIndexSet::new(s).expect("rank must be positive");
    let g = set.dim();
    let mut alpha = DMatrix::zeros(g, g);
    for a in 0..g {
        alpha[(a, set.bar(a))] = if a <= s { 1.0 } else { -1.0 };
    }
    alpha
}

/// Graded permutation: `P|ab⟩ = (-1)^{p(a)p(b)} |ba⟩`.
pub fn build_p(s: usize) -> TensorOperator {
    let set = GradedIndexSet::new(s).expect("rank must be positive");
    let g = set.dim();
    let mut p = TensorOperator::zeros(2, g);
    for a in 0..g {
        for b in 0..g {
            let sign = if set.parity(a) * set.parity(b) == 1 { -1.0 } else { 1.0 };
            p.set_entry(&[b, a], &[a, b], Complex64::new(sign, 0.0));
        }
    }
    p
}

/// `E^{cd}_{ab} = α_{ab} (α⁻¹)_{cd}`, i.e. `⟨cd|E|ab⟩`.
pub fn build_e(s: usize) -> TensorOperator {
    let alpha = build_alpha(s);
    let inv = alpha
        .clone()
        .try_inverse()
        .expect("anti-diagonal sign matrix is invertible");
    let g = alpha.nrows();
    let mut e = TensorOperator::zeros(2, g);
    for a in 0..g {
        for b in 0..g {
            if alpha[(a, b)] == 0.0 {
                continue;
            }
            for c in 0..g {
                for d in 0..g {
                    let value = alpha[(a, b)] * inv[(c, d)];
                    if value != 0.0 {
                        e.set_entry(&[c, d], &[a, b], Complex64::new(value, 0.0));
                    }
                }
            }
        }
    }
    e
}

fn check_pole(v: Complex64, s: usize) -> Result<()> {
    let g = (2 * s + 1) as f64;
    if (2.0 * v - g).norm() < 1e-13 * g {
        return Err(Error::Pole {
            what: "R-matrix",
            at: v,
        });
    }
    Ok(())
}

/// `Ř(v) = I + vP - 2v/(2v-g) E`.
pub fn r_check(v: Complex64, s: usize) -> Result<TensorOperator> {
    check_pole(v, s)?;
    let g = (2 * s + 1) as f64;
    let p = build_p(s);
    let e = build_e(s);
    let coeff = -2.0 * v / (2.0 * v - g);
    Ok(TensorOperator::identity(2, 2 * s + 1)
        .add(&p.scale(v))
        .add(&e.scale(coeff)))
}

/// `R^{cd}_{ab}(v) = Ř^{cd}_{ba}(v)`: Ř composed with the ungraded swap of the
/// input pair.
pub fn r_matrix(v: Complex64, s: usize) -> Result<TensorOperator> {
    let rc = r_check(v, s)?;
    let g = 2 * s + 1;
    let mut r = TensorOperator::zeros(2, g);
    for a in 0..g {
        for b in 0..g {
            for c in 0..g {
                for d in 0..g {
                    r.set_entry(&[c, d], &[a, b], rc.entry(&[c, d], &[b, a]));
                }
            }
        }
    }
    Ok(r)
}

/// `(R(v), R̃(v))`. `R̃` is `R` transposed in its first tensor factor; place
/// that factor on the space the transposition refers to.
pub fn r_and_rtilde(v: Complex64, s: usize) -> Result<(TensorOperator, TensorOperator)> {
    let r = r_matrix(v, s)?;
    let rt = r.partial_transpose(0);
    Ok((r, rt))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    #[test]
    fn alpha_signs() {
        let a = build_alpha(1);
        assert_eq!(a[(0, 2)], 1.0);
        assert_eq!(a[(1, 1)], 1.0);
        assert_eq!(a[(2, 0)], -1.0);
        assert_eq!(a.iter().filter(|x| **x != 0.0).count(), 3);
        let a2 = build_alpha(2);
        let signs: Vec<f64> = (0..5).map(|i| a2[(i, 4 - i)]).collect();
        assert_eq!(signs, vec![1.0, 1.0, 1.0, -1.0, -1.0]);
        assert_eq!(a2.iter().filter(|x| **x != 0.0).count(), 5);
        for s in 1..=4 {
            let a = build_alpha(s);
            let prod = &a * a.clone().try_inverse().unwrap();
            assert!((prod - DMatrix::<f64>::identity(2 * s + 1, 2 * s + 1)).amax() < 1e-15);
        }
    }

    #[test]
    fn p_entries_and_square() {
        let p = build_p(1);
        assert_eq!(p.entry(&[0, 0], &[0, 0]), c(-1.0, 0.0));
        assert_eq!(p.entry(&[1, 1], &[1, 1]), c(1.0, 0.0));
        let sq = p.compose(&p);
        assert_eq!(sq, TensorOperator::identity(2, 3));
    }

    #[test]
    fn e_support_trace_and_square() {
        for s in 1..=3 {
            let set = GradedIndexSet::new(s).unwrap();
            let g = set.dim();
            let e = build_e(s);
            for a in 0..g {
                for b in 0..g {
                    for cc in 0..g {
                        for d in 0..g {
                            let x = e.entry(&[cc, d], &[a, b]);
                            if b != set.bar(a) || d != set.bar(cc) {
                                assert_eq!(x, c(0.0, 0.0));
                            } else {
                                assert_ne!(x, c(0.0, 0.0));
                            }
                        }
                    }
                }
            }
            let tr: Complex64 = e.matrix().diagonal().iter().sum();
            assert_eq!(tr, c(1.0 - 2.0 * s as f64, 0.0));
        }
        // E² = κE with κ = -1 at s = 1 (pinned after a first dense evaluation).
        let e = build_e(1);
        let kappa = -1.0;
        let diff = e.compose(&e).add(&e.scale(c(-kappa, 0.0)));
        assert!(diff.max_abs() < 1e-15);
    }

    #[test]
    fn r_check_values() {
        for s in 1..=4 {
            let r0 = r_check(c(0.0, 0.0), s).unwrap();
            assert_eq!(r0, TensorOperator::identity(2, 2 * s + 1));
        }
        let v = c(0.3, -0.7);
        for s in 1..=2 {
            let r = r_check(v, s).unwrap();
            assert!((r.entry(&[0, 0], &[0, 0]) - (1.0 - v)).norm() < 1e-15);
        }
        assert!(matches!(r_check(c(1.5, 0.0), 1), Err(Error::Pole { .. })));
        assert!(r_check(c(2.5, 0.0), 2).is_err());
    }

    #[test]
    fn r_and_rtilde_index_shuffles() {
        let v = c(0.37, 0.21);
        let rc = r_check(v, 1).unwrap();
        let (r, rt) = r_and_rtilde(v, 1).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                for cc in 0..3 {
                    for d in 0..3 {
                        assert_eq!(r.entry(&[cc, d], &[a, b]), rc.entry(&[cc, d], &[b, a]));
                        // transposition in the first factor swaps a and c
                        assert_eq!(rt.entry(&[cc, d], &[a, b]), r.entry(&[a, d], &[cc, b]));
                    }
                }
            }
        }
        assert_eq!(rt.partial_transpose(0), r);
        // R(0) is the ungraded swap
        let r0 = r_matrix(c(0.0, 0.0), 1).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert_eq!(r0.entry(&[b, a], &[a, b]), c(1.0, 0.0));
            }
        }
    }
}
