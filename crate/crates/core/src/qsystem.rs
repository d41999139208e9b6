//! The constant asymptotic values `Q^(a)_m` and the recursion they satisfy.

use num_bigint::BigInt;
use num_traits::Pow;

use crate::rational::{factorial, Rational};

/// Closed-form product
/// `((m+g)! m! / ((m+a)! (m+g-a)!))^m ∏_{k=1}^m ((k+a)(k+g-a) / (k(k+g)))^k`
/// with `g = 2s+1`. Valid for `0 ≤ a ≤ s`; `a = s+1` is mapped to `a = s`.
pub fn q_closed_form(a: usize, m: usize, s: usize) -> Rational {
    assert!(s >= 1 && a <= s + 1, "need 0 <= a <= s+1");
    let a = a.min(s) as u64;
    let g = 2 * s as u64 + 1;
    let m64 = m as u64;
    let base = Rational::new(
        factorial(m64 + g) * factorial(m64),
        factorial(m64 + a) * factorial(m64 + g - a),
    );
    let mut q = Pow::pow(base, m);
    for k in 1..=m64 {
        let ratio = Rational::new(BigInt::from((k + a) * (k + g - a)), BigInt::from(k * (k + g)));
        q *= Pow::pow(ratio, k as usize);
    }
    q
}

/// `Q^(a)_m` for `0 ≤ a ≤ s+1`, `0 ≤ m ≤ m_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    s: usize,
    m_max: usize,
    values: Vec<Vec<Rational>>,
}

/// Outcome of checking the recursion. `first_failure` is the `(a, m)` of the
/// first violated equation (scanning `m`, then `a`); `culprit` is the single
/// table entry shared by every violated equation, when there is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionCheck {
    pub holds: bool,
    pub first_failure: Option<(usize, usize)>,
    pub culprit: Option<(usize, usize)>,
}

impl QTable {
    pub fn new(s: usize, m_max: usize) -> Self {
        let values = (0..=s + 1)
            .map(|a| (0..=m_max).map(|m| q_closed_form(a, m, s)).collect())
            .collect();
        Self { s, m_max, values }
    }

    pub fn rank(&self) -> usize {
        self.s
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn get(&self, a: usize, m: usize) -> &Rational {
        &self.values[a][m]
    }

    /// Overwrites one entry (used to exercise the checker).
    pub fn set(&mut self, a: usize, m: usize, value: Rational) {
        self.values[a][m] = value;
    }

    /// `(Q^(a)_m)² = Q^(a)_{m-1} Q^(a)_{m+1} + Q^(a-1)_m Q^(a+1)_m` for
    /// `1 ≤ a ≤ s`, `1 ≤ m < m_max`, where `Q^(s+1)` is read from the stored
    /// row `s+1` (equal to row `s` unless altered).
    pub fn check_recursion(&self) -> RecursionCheck {
        let mut failures = Vec::new();
        for m in 1..self.m_max {
            for a in 1..=self.s {
                let q = &self.values[a][m];
                let rhs =
                    &self.values[a][m - 1] * &self.values[a][m + 1] + &self.values[a - 1][m] * &self.values[a + 1][m];
                if q * q != rhs {
                    failures.push((a, m));
                }
            }
        }
        let involved = |(a, m): (usize, usize)| [(a, m), (a, m - 1), (a, m + 1), (a - 1, m), (a + 1, m)];
        let culprit = failures.first().and_then(|&first| {
            let common: Vec<_> = involved(first)
                .into_iter()
                .filter(|e| failures.iter().all(|&f| involved(f).contains(e)))
                .collect();
            (common.len() == 1).then(|| common[0])
        });
        RecursionCheck {
            holds: failures.is_empty(),
            first_failure: failures.first().copied(),
            culprit,
        }
    }
}

/// Builds the table to `m_max + 1` and checks the recursion for
/// `1 ≤ m ≤ m_max`.
pub fn q_check_recursion(s: usize, m_max: usize) -> RecursionCheck {
    QTable::new(s, m_max + 1).check_recursion()
}

/// `Q^(a)_1` as an `f64`.
pub fn q1(a: usize, s: usize) -> f64 {
    crate::rational::to_f64(&q_closed_form(a, 1, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{binomial, int};
    use num_traits::Zero;

    #[test]
    fn first_values() {
        assert_eq!(q_closed_form(1, 1, 1), int(3));
        assert_eq!(q_closed_form(2, 1, 2), int(10));
        assert_eq!(q_closed_form(1, 2, 1), int(6));
        for s in 1..=4 {
            for a in 0..=s {
                assert_eq!(q_closed_form(a, 0, s), int(1));
                assert_eq!(
                    q_closed_form(a, 1, s),
                    Rational::from_integer(binomial(2 * s as u64 + 1, a as u64))
                );
            }
        }
        // 9 = Q_2 + Q^(0) Q^(2), with Q^(2) = Q^(1) at s = 1
        let t = QTable::new(1, 3);
        assert_eq!(
            t.get(1, 1) * t.get(1, 1),
            t.get(1, 2) * t.get(1, 0) + t.get(0, 1) * t.get(2, 1)
        );
    }

    #[test]
    fn recursion_exact() {
        for s in 1..=4 {
            let check = q_check_recursion(s, 20);
            assert!(check.holds, "s={s}: {:?}", check.first_failure);
        }
    }

    #[test]
    fn entries_positive_and_growing() {
        let t = QTable::new(3, 12);
        for a in 0..=4 {
            for m in 0..=12 {
                assert!(*t.get(a, m) > Rational::zero());
            }
        }
        for a in 1..=3 {
            for m in 0..12 {
                assert!(t.get(a, m + 1) > t.get(a, m));
            }
        }
    }

    #[test]
    fn tampering_is_reported() {
        let mut t = QTable::new(2, 8);
        let bumped = t.get(2, 4) + int(1);
        t.set(2, 4, bumped);
        let check = t.check_recursion();
        assert!(!check.holds);
        // (2,4) enters the m = 3 line first through Q^(2)_{m+1}.
        assert_eq!(check.first_failure, Some((2, 3)));
        assert_eq!(check.culprit, Some((2, 4)));
    }

    #[test]
    fn large_m_supported() {
        let q = q_closed_form(2, 64, 4);
        assert!(q > Rational::zero());
    }
}
