//! Exact high-temperature expansion for `s = 1`.
//!
//! `𝒯^(1)_1(v) = exp(Σ_n a_n(v) βⁿ)` with `β = J/T`, `a_0 = log 3` and
//!
//! ```text
//! a_n(v) = Σ_{j<n} b_{n,j} v^{2j}/(v²+1)ⁿ + c_{n,j} v^{2j}/(v²+9/4)ⁿ .
//! ```
//!
//! Substituting into the `m = 1` equation, every contour integral becomes a
//! finite residue at `y = 0`. The unknowns at each order follow from an exact
//! linear system over the rationals. All rational functions are kept in
//! partial-fraction form with poles on the lattice `(i/2)ℤ`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{binomial, frac, int, to_f64, Rational};

/// Highest supported expansion order.
pub const MAX_ORDER: usize = 16;

/// Exact complex number with rational parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gaussian {
    pub re: Rational,
    pub im: Rational,
}

impl Gaussian {
    pub fn new(re: Rational, im: Rational) -> Self {
        Self { re, im }
    }

    pub fn zero() -> Self {
        Self::new(Rational::zero(), Rational::zero())
    }

    pub fn one() -> Self {
        Self::real(Rational::one())
    }

    pub fn real(re: Rational) -> Self {
        Self::new(re, Rational::zero())
    }

    /// `k·i/2`.
    pub fn half_i(k: i64) -> Self {
        Self::new(Rational::zero(), frac(k, 2))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn inv(&self) -> Self {
        let d = &self.re * &self.re + &self.im * &self.im;
        Self::new(&self.re / &d, -&self.im / &d)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(&self.re * k, &self.im * k)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(to_f64(&self.re), to_f64(&self.im))
    }
}

impl fmt::Display for Gaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + {}i)", self.re, self.im)
    }
}

impl Add for &Gaussian {
    type Output = Gaussian;
    fn add(self, o: &Gaussian) -> Gaussian {
        Gaussian::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &Gaussian {
    type Output = Gaussian;
    fn sub(self, o: &Gaussian) -> Gaussian {
        Gaussian::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &Gaussian {
    type Output = Gaussian;
    fn mul(self, o: &Gaussian) -> Gaussian {
        Gaussian::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

impl Neg for &Gaussian {
    type Output = Gaussian;
    fn neg(self) -> Gaussian {
        Gaussian::new(-&self.re, -&self.im)
    }
}

impl AddAssign<&Gaussian> for Gaussian {
    fn add_assign(&mut self, o: &Gaussian) {
        self.re += &o.re;
        self.im += &o.im;
    }
}

/// Truncated Laurent series `Σ_e coeff(e) yᵉ` around `i·center`, exact for
/// exponents `low..=valid`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentAtPoint {
    pub center: Rational,
    pub low: i64,
    pub valid: i64,
    pub coeffs: Vec<Gaussian>,
}

impl LaurentAtPoint {
    fn constant(center: Rational, c: Gaussian, valid: i64) -> Self {
        let mut coeffs = vec![Gaussian::zero(); (valid + 1).max(1) as usize];
        coeffs[0] = c;
        Self {
            center,
            low: 0,
            valid,
            coeffs,
        }
    }

    pub fn coefficient(&self, e: i64) -> Gaussian {
        let j = e - self.low;
        if j >= 0 && (j as usize) < self.coeffs.len() && e <= self.valid {
            self.coeffs[j as usize].clone()
        } else {
            Gaussian::zero()
        }
    }

    /// Lowest exponent with a nonzero coefficient (`None` for zero).
    pub fn order(&self) -> Option<i64> {
        (self.low..=self.valid).find(|&e| !self.coefficient(e).is_zero())
    }

    pub fn mul(&self, other: &Self, cap: i64) -> Self {
        let valid = (self.valid + other.low).min(other.valid + self.low).min(cap);
        let low = self.low + other.low;
        let mut out = vec![Gaussian::zero(); (valid - low + 1).max(0) as usize];
        for (i, x) in self.coeffs.iter().enumerate() {
            let ea = self.low + i as i64;
            if ea > self.valid || ea + other.low > valid {
                break;
            }
            if x.is_zero() {
                continue;
            }
            for (j, y) in other.coeffs.iter().enumerate() {
                let eb = other.low + j as i64;
                if eb > other.valid || ea + eb > valid {
                    break;
                }
                if y.is_zero() {
                    continue;
                }
                out[(ea + eb - low) as usize] += &(x * y);
            }
        }
        Self {
            center: self.center.clone(),
            low,
            valid,
            coeffs: out,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let low = self.low.min(other.low);
        let valid = self.valid.min(other.valid);
        let coeffs = (low..=valid)
            .map(|e| &self.coefficient(e) + &other.coefficient(e))
            .collect();
        Self {
            center: self.center.clone(),
            low,
            valid,
            coeffs,
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.scale(k)).collect(),
            ..self.clone()
        }
    }

    /// Principal part as a pole of the result at `key·i/2`: the coefficient
    /// of `y^{-m}` becomes that of `(v - key·i/2)^{-m}`.
    fn principal_part_at(&self, key: i64) -> PoleRational {
        let mut out = PoleRational::zero();
        if self.low < 0 {
            let co = (1..=-self.low).map(|m| self.coefficient(-m)).collect();
            out.poles.insert(key, co);
        }
        out.normalized()
    }
}

/// Rational function of `v` in partial-fraction form: a constant plus
/// principal parts `Σ_m x_m (v - k·i/2)^{-m}` at lattice points `k·i/2`.
///
/// The representation is canonical: no trailing zero coefficients, no empty
/// pole entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoleRational {
    pub constant: Gaussian,
    /// Pole position in units of `i/2` → coefficients of `(v-p)^{-1}, (v-p)^{-2}, …`.
    pub poles: BTreeMap<i64, Vec<Gaussian>>,
}

impl PoleRational {
    pub fn zero() -> Self {
        Self::constant(Gaussian::zero())
    }

    pub fn constant(c: Gaussian) -> Self {
        Self {
            constant: c,
            poles: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.constant.is_zero() && self.poles.is_empty()
    }

    /// Constant in `v`.
    pub fn is_constant(&self) -> bool {
        self.poles.is_empty()
    }

    fn normalized(mut self) -> Self {
        for v in self.poles.values_mut() {
            while v.last().is_some_and(Gaussian::is_zero) {
                v.pop();
            }
        }
        self.poles.retain(|_, v| !v.is_empty());
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(other, &Rational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(other, &-Rational::one())
    }

    fn add_scaled(&self, other: &Self, k: &Rational) -> Self {
        let mut r = self.clone();
        r.constant += &other.constant.scale(k);
        for (p, v) in &other.poles {
            let cur = r.poles.entry(*p).or_default();
            if cur.len() < v.len() {
                cur.resize(v.len(), Gaussian::zero());
            }
            for (c, x) in cur.iter_mut().zip(v) {
                *c += &x.scale(k);
            }
        }
        r.normalized()
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self {
            constant: self.constant.scale(k),
            poles: self
                .poles
                .iter()
                .map(|(p, v)| (*p, v.iter().map(|x| x.scale(k)).collect()))
                .collect(),
        }
        .normalized()
    }

    /// `g(v) = f(v + l·i/2)`.
    pub fn shift(&self, l: i64) -> Self {
        Self {
            constant: self.constant.clone(),
            poles: self.poles.iter().map(|(p, v)| (p - l, v.clone())).collect(),
        }
    }

    fn pole_order(&self, k: i64) -> usize {
        self.poles.get(&k).map_or(0, Vec::len)
    }

    /// Laurent expansion around `k0·i/2` through `y^hi`.
    fn laurent_half(&self, k0: i64, hi: i64) -> LaurentAtPoint {
        let pp = self.poles.get(&k0).cloned().unwrap_or_default();
        let low = -(pp.len() as i64);
        let mut out = vec![Gaussian::zero(); (hi - low + 1).max(0) as usize];
        for (m, x) in pp.iter().enumerate() {
            out[(-(m as i64 + 1) - low) as usize] += x;
        }
        if hi >= 0 {
            out[(-low) as usize] += &self.constant;
        }
        for (q, v) in &self.poles {
            if *q == k0 {
                continue;
            }
            // (y + d)^{-m} = d^{-m} Σ_j C(-m, j) (y/d)^j
            let dinv = Gaussian::half_i(k0 - q).inv();
            for (m0, x) in v.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                let m = m0 as u64 + 1;
                let mut term = x * &dinv.pow(m as u32);
                for j in 0..=hi.max(-1) {
                    let c = Rational::from_integer(binomial(m + j as u64 - 1, j as u64));
                    let c = if j % 2 == 0 { c } else { -c };
                    out[(j - low) as usize] += &term.scale(&c);
                    term = &term * &dinv;
                }
            }
        }
        LaurentAtPoint {
            center: frac(k0, 2),
            low,
            valid: hi,
            coeffs: out,
        }
    }

    pub fn eval(&self, z: &Gaussian) -> Result<Gaussian> {
        let mut r = self.constant.clone();
        for (p, v) in &self.poles {
            let d = z - &Gaussian::half_i(*p);
            if d.is_zero() {
                return Err(Error::Pole {
                    what: "pole-rational function",
                    at: z.to_c64(),
                });
            }
            let w = d.inv();
            let mut pw = w.clone();
            for x in v {
                r += &(x * &pw);
                pw = &pw * &w;
            }
        }
        Ok(r)
    }

    pub fn eval_c64(&self, z: Complex64) -> Complex64 {
        let mut r = self.constant.to_c64();
        for (p, v) in &self.poles {
            let w = (z - Complex64::new(0.0, *p as f64 / 2.0)).inv();
            let mut pw = w;
            for x in v {
                r += x.to_c64() * pw;
                pw *= w;
            }
        }
        r
    }

    pub fn mul(&self, other: &Self) -> Self {
        let a_poles = Self {
            constant: Gaussian::zero(),
            poles: self.poles.clone(),
        };
        let b_poles = Self {
            constant: Gaussian::zero(),
            poles: other.poles.clone(),
        };
        let mut r = Self::constant(&self.constant * &other.constant);
        r = r.add(&b_poles.scale_gaussian(&self.constant));
        r = r.add(&a_poles.scale_gaussian(&other.constant));
        let keys: std::collections::BTreeSet<i64> = self.poles.keys().chain(other.poles.keys()).copied().collect();
        for k in keys {
            let oa = self.pole_order(k) as i64;
            let ob = other.pole_order(k) as i64;
            let la = a_poles.laurent_half(k, ob);
            let lb = b_poles.laurent_half(k, oa);
            r = r.add(&la.mul(&lb, -1).principal_part_at(k));
        }
        r
    }

    fn scale_gaussian(&self, k: &Gaussian) -> Self {
        Self {
            constant: &self.constant * k,
            poles: self
                .poles
                .iter()
                .map(|(p, v)| (*p, v.iter().map(|x| x * k).collect()))
                .collect(),
        }
        .normalized()
    }

    /// Builds `Σ_j b_j v^{2j}/(v²+1)ⁿ + c_j v^{2j}/(v²+9/4)ⁿ`.
    pub fn from_ansatz(n: usize, b: &[Rational], c: &[Rational]) -> Self {
        let mut out = Self::zero();
        for (j, x) in b.iter().enumerate() {
            out = out.add(&ansatz_basis(n, j, 2).scale(x));
        }
        for (j, x) in c.iter().enumerate() {
            out = out.add(&ansatz_basis(n, j, 3).scale(x));
        }
        out
    }

    /// Inverse of [`from_ansatz`](Self::from_ansatz): the real coefficients
    /// `(b_j, c_j)`, `j < n`, or an error if `self` is not of that form.
    pub fn ansatz_coefficients(&self, n: usize) -> Result<(Vec<Rational>, Vec<Rational>)> {
        let bad = |detail: String| Error::Inconsistent { order: n, detail };
        if !self.constant.is_zero() {
            return Err(bad("nonzero constant term".into()));
        }
        if let Some(k) = self.poles.keys().find(|k| ![-3, -2, 2, 3].contains(*k)) {
            return Err(bad(format!("pole at {k}i/2 outside the ansatz family")));
        }
        let family = |kp: i64| -> Result<Vec<Rational>> {
            // numerator (v²+p²)ⁿ Σ_m x_m (v∓p)^{-m} as a polynomial in v
            let mut num = vec![Gaussian::zero(); 2 * n];
            for sign in [1, -1] {
                let Some(v) = self.poles.get(&(sign * kp)) else {
                    continue;
                };
                if v.len() > n {
                    return Err(bad(format!("pole order {} above {n}", v.len())));
                }
                let p = Gaussian::half_i(sign * kp);
                for (m0, x) in v.iter().enumerate() {
                    let m = m0 + 1;
                    // (v - p)^{n-m} (v + p)^n
                    let poly = poly_mul(&linear_power(&(-&p), n - m), &linear_power(&p, n));
                    for (e, c) in poly.iter().enumerate() {
                        num[e] += &(x * c);
                    }
                }
            }
            let mut out = Vec::with_capacity(n);
            for (e, c) in num.iter().enumerate() {
                if !c.im.is_zero() {
                    return Err(bad(format!("complex numerator coefficient {c} at v^{e}")));
                }
                if e % 2 == 1 {
                    if !c.re.is_zero() {
                        return Err(bad(format!("odd numerator power v^{e}")));
                    }
                } else {
                    out.push(c.re.clone());
                }
            }
            Ok(out)
        };
        Ok((family(2)?, family(3)?))
    }
}

impl fmt::Display for PoleRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (p, v) in &self.poles {
            for (m, x) in v.iter().enumerate() {
                write!(f, " + {x}/(v - {}i)^{}", frac(*p, 2), m + 1)?;
            }
        }
        Ok(())
    }
}

/// Coefficients of `(v + a)^k` in increasing powers of `v`.
fn linear_power(a: &Gaussian, k: usize) -> Vec<Gaussian> {
    (0..=k)
        .map(|e| {
            let c = Rational::from_integer(binomial(k as u64, e as u64));
            a.pow((k - e) as u32).scale(&c)
        })
        .collect()
}

fn poly_mul(a: &[Gaussian], b: &[Gaussian]) -> Vec<Gaussian> {
    let mut out = vec![Gaussian::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += &(x * y);
        }
    }
    out
}

/// Partial fractions of `v^{2j} / ((v-p)(v+p))ⁿ`, `p = kp·i/2`.
fn ansatz_basis(n: usize, j: usize, kp: i64) -> PoleRational {
    let mut out = PoleRational::zero();
    for sign in [1, -1] {
        let p = Gaussian::half_i(sign * kp);
        let dinv = Gaussian::half_i(2 * sign * kp).inv();
        // v^{2j} around p: (p + y)^{2j}
        let num = linear_power(&p, 2 * j);
        // (y + 2p)^{-n} = (2p)^{-n} Σ_l C(-n, l) (y/2p)^l
        let den: Vec<Gaussian> = (0..n)
            .map(|l| {
                let c = Rational::from_integer(binomial((n + l - 1) as u64, l as u64));
                let c = if l % 2 == 0 { c } else { -c };
                dinv.pow((n + l) as u32).scale(&c)
            })
            .collect();
        let mut co = vec![Gaussian::zero(); n];
        for (l1, x) in num.iter().enumerate() {
            for (l2, y) in den.iter().enumerate() {
                let e = l1 as i64 + l2 as i64 - n as i64;
                if e < 0 {
                    co[(-e - 1) as usize] += &(x * y);
                }
            }
        }
        let mut single = PoleRational::zero();
        single.poles.insert(sign * kp, co);
        out = out.add(&single.normalized());
    }
    out
}

/// `f(y + i·center)` around `y = 0` through `y^order`.
///
/// `center` must be a multiple of `1/2` so that it lands on the pole lattice.
pub fn shift_laurent(f: &PoleRational, center: &Rational, order: i64) -> Result<LaurentAtPoint> {
    let twice = center * int(2);
    if !twice.is_integer() {
        return Err(Error::InvalidParams(format!(
            "unsupported expansion centre {center}i (not on the half-integer lattice)"
        )));
    }
    let k = twice.to_integer();
    let k: i64 =
        i64::try_from(&k).map_err(|_| Error::InvalidParams(format!("expansion centre {center}i out of range")))?;
    let mut l = f.laurent_half(k, order);
    l.center = center.clone();
    Ok(l)
}

/// Truncated power series `Σ_{n≤order} x_n βⁿ` with [`PoleRational`]
/// coefficients. The order-0 term may additionally carry `log q` for a
/// rational `q`, kept symbolic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaSeries {
    pub coeffs: Vec<PoleRational>,
    pub log_of: Option<Rational>,
}

impl BetaSeries {
    pub fn new(coeffs: Vec<PoleRational>) -> Self {
        assert!(!coeffs.is_empty(), "series needs an order-0 coefficient");
        Self { coeffs, log_of: None }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn check_order(&self, other: &Self) -> Result<usize> {
        if self.order() != other.order() {
            return Err(Error::InvalidParams(format!(
                "truncation orders differ ({} vs {})",
                self.order(),
                other.order()
            )));
        }
        Ok(self.order())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let log_of = match (&self.log_of, &other.log_of) {
            (Some(p), Some(q)) => Some(p * q),
            (Some(p), None) | (None, Some(p)) => Some(p.clone()),
            (None, None) => None,
        };
        Ok(Self {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.add(b)).collect(),
            log_of,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let order = self.check_order(other)?;
        if self.log_of.is_some() || other.log_of.is_some() {
            return Err(Error::InvalidParams("product of a series carrying a logarithm".into()));
        }
        let coeffs = (0..=order)
            .map(|n| {
                (0..=n).fold(PoleRational::zero(), |acc, k| {
                    acc.add(&self.coeffs[k].mul(&other.coeffs[n - k]))
                })
            })
            .collect();
        Ok(Self::new(coeffs))
    }

    fn invertible_constant(&self, what: &str) -> Result<Rational> {
        let c0 = &self.coeffs[0];
        if self.log_of.is_some() || !c0.is_constant() || !c0.constant.im.is_zero() || c0.constant.re.is_zero() {
            return Err(Error::InvalidParams(format!(
                "{what} needs a nonzero real constant order-0 term"
            )));
        }
        Ok(c0.constant.re.clone())
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.invertible_constant("reciprocal")?;
        let inv0 = c0.recip();
        let mut out = vec![PoleRational::constant(Gaussian::real(inv0.clone()))];
        for n in 1..=self.order() {
            let acc = (1..=n).fold(PoleRational::zero(), |acc, k| acc.add(&self.coeffs[k].mul(&out[n - k])));
            out.push(acc.scale(&-inv0.clone()));
        }
        Ok(Self::new(out))
    }

    /// Requires the order-0 term to be zero apart from a symbolic `log q`,
    /// which turns into an overall factor `q`.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::InvalidParams(
                "exp needs a vanishing order-0 term (besides a symbolic logarithm)".into(),
            ));
        }
        let mut out = vec![PoleRational::constant(Gaussian::one())];
        for n in 1..=self.order() {
            let acc = (1..=n).fold(PoleRational::zero(), |acc, k| {
                acc.add(&self.coeffs[k].mul(&out[n - k]).scale(&int(k as i64)))
            });
            out.push(acc.scale(&frac(1, n as i64)));
        }
        let series = Self::new(out);
        Ok(match &self.log_of {
            Some(q) => Self::new(series.coeffs.iter().map(|c| c.scale(q)).collect()),
            None => series,
        })
    }

    /// Logarithm of a series with a positive rational constant order-0 term
    /// `q`; the result carries `log q` symbolically.
    pub fn log(&self) -> Result<Self> {
        let c0 = self.invertible_constant("log")?;
        if !c0.is_positive() {
            return Err(Error::InvalidParams(format!("log of a series with order-0 term {c0}")));
        }
        let inv0 = c0.recip();
        let mut out: Vec<PoleRational> = vec![PoleRational::zero()];
        for n in 1..=self.order() {
            let mut acc = self.coeffs[n].scale(&int(n as i64));
            for (k, o) in out.iter().enumerate().skip(1) {
                acc = acc.sub(&o.mul(&self.coeffs[n - k]).scale(&int(k as i64)));
            }
            out.push(acc.scale(&(&inv0 / int(n as i64))));
        }
        Ok(Self {
            coeffs: out,
            log_of: if c0.is_one() { None } else { Some(c0) },
        })
    }
}

/// One contour term: kernel pole, numerator shift and denominator shift, in
/// units of `i/2`.
#[derive(Debug, Clone, Copy)]
struct Term {
    pole: i64,
    num: i64,
    den: i64,
}

fn terms() -> Vec<Term> {
    let mut out = Vec::new();
    for bk in [2, 3] {
        for sg in [1, -1] {
            out.push(Term {
                pole: sg * bk,
                num: sg * (bk - 1),
                den: sg * (bk - 2),
            });
        }
    }
    out
}

/// Exponent of the known function per unit `β`: `-1/(v² + 1/4)`.
fn known_exponent() -> PoleRational {
    let mut p = PoleRational::zero();
    p.poles.insert(1, vec![Gaussian::new(Rational::zero(), int(1))]);
    p.poles.insert(-1, vec![Gaussian::new(Rational::zero(), int(-1))]);
    p
}

/// `Q^(1)_1` for `s = 1`.
fn q() -> Rational {
    int(3)
}

/// Order-`n` coefficient of the right-hand side with the new unknown `a_n`
/// set to zero: the sum over the four contour terms of the principal parts at
/// `y = 0`, each re-expanded around its kernel pole. `lower` holds
/// `a_1 … a_{n-1}`. Order 0 is the constant `Q^(1)_1 = 3`.
pub fn contour_residue_rhs(n: usize, lower: &[PoleRational]) -> Result<PoleRational> {
    if n == 0 {
        return Ok(PoleRational::constant(Gaussian::real(q())));
    }
    if lower.len() + 1 < n {
        return Err(Error::InvalidParams(format!(
            "order {n} needs {} lower coefficients, got {}",
            n - 1,
            lower.len()
        )));
    }
    // pole orders at y = 0 are bounded by the order, so y^{n-1} suffices
    let hi = n as i64;
    let e0 = known_exponent();
    let mut out = PoleRational::zero();
    for t in terms() {
        let mut s_parts = vec![None];
        for m in 1..=n {
            let mut ps = PoleRational::zero();
            if m == 1 {
                ps = ps.add(&e0.shift(t.num));
            }
            if m < n {
                ps = ps.add(&lower[m - 1].shift(t.num)).sub(&lower[m - 1].shift(t.den));
            }
            s_parts.push(Some(ps.laurent_half(0, hi)));
        }
        let mut e = vec![LaurentAtPoint::constant(Rational::zero(), Gaussian::one(), hi)];
        for m in 1..=n {
            let mut acc: Option<LaurentAtPoint> = None;
            for k in 1..=m {
                let term = s_parts[k]
                    .as_ref()
                    .expect("filled above")
                    .mul(&e[m - k], hi)
                    .scale(&frac(k as i64, m as i64));
                acc = Some(match acc {
                    None => term,
                    Some(a) => a.add(&term),
                });
            }
            e.push(acc.expect("m >= 1"));
        }
        if e[n].valid < -1 {
            return Err(Error::Inconsistent {
                order: n,
                detail: format!("principal part truncated at y^{}", e[n].valid),
            });
        }
        out = out.add(&e[n].principal_part_at(t.pole));
    }
    Ok(out)
}

/// Contribution of the new unknown to the right-hand side:
/// `Σ_terms PP₀[φ(y+num) - φ(y+den)]` placed at the kernel poles.
fn linear_part(phi: &PoleRational) -> PoleRational {
    let mut out = PoleRational::zero();
    for t in terms() {
        let l = phi.shift(t.num).sub(&phi.shift(t.den)).laurent_half(0, 0);
        out = out.add(&l.principal_part_at(t.pole));
    }
    out
}

/// `Σ_{k<n} (k/n) a_k r_{n-k}`: the part of the order-`n` coefficient of
/// `exp(Σ a_k βᵏ)` (without the factor 3) that does not involve `a_n`.
fn exp_lower(n: usize, a: &[PoleRational], r: &[PoleRational]) -> PoleRational {
    (1..n).fold(PoleRational::zero(), |acc, k| {
        acc.add(&a[k - 1].mul(&r[n - k]).scale(&frac(k as i64, n as i64)))
    })
}

/// Solves `3 a_n - linear_part(a_n) = rhs - 3·lower` for `a_n` in the ansatz
/// family; returns `(b_{n,j}, c_{n,j})`.
pub fn match_ansatz(n: usize, rhs: &PoleRational, lower: &PoleRational) -> Result<(Vec<Rational>, Vec<Rational>)> {
    let target = rhs.sub(&lower.scale(&q()));
    let mut images = Vec::with_capacity(2 * n);
    for kp in [2, 3] {
        for j in 0..n {
            let phi = ansatz_basis(n, j, kp);
            images.push(phi.scale(&q()).sub(&linear_part(&phi)));
        }
    }
    // unknowns x = p + iq; every partial-fraction coefficient gives two real rows
    let mut keys: Vec<Option<(i64, usize)>> = vec![None];
    for ps in images.iter().chain(std::iter::once(&target)) {
        for (k, v) in &ps.poles {
            for m in 0..v.len() {
                if !keys.contains(&Some((*k, m))) {
                    keys.push(Some((*k, m)));
                }
            }
        }
    }
    let coef = |ps: &PoleRational, key: &Option<(i64, usize)>| -> Gaussian {
        match key {
            None => ps.constant.clone(),
            Some((k, m)) => ps
                .poles
                .get(k)
                .and_then(|v| v.get(*m))
                .cloned()
                .unwrap_or_else(Gaussian::zero),
        }
    };
    let nu = images.len();
    let mut rows = Vec::with_capacity(2 * keys.len());
    for key in &keys {
        let cs: Vec<Gaussian> = images.iter().map(|ps| coef(ps, key)).collect();
        let r = coef(&target, key);
        let mut re_row: Vec<Rational> = cs.iter().map(|c| c.re.clone()).collect();
        re_row.extend(cs.iter().map(|c| -c.im.clone()));
        re_row.push(r.re);
        let mut im_row: Vec<Rational> = cs.iter().map(|c| c.im.clone()).collect();
        im_row.extend(cs.iter().map(|c| c.re.clone()));
        im_row.push(r.im);
        rows.push(re_row);
        rows.push(im_row);
    }
    let sol = solve_exact(rows, 2 * nu).map_err(|detail| Error::Inconsistent { order: n, detail })?;
    if let Some(x) = sol[nu..].iter().find(|x| !x.is_zero()) {
        return Err(Error::Inconsistent {
            order: n,
            detail: format!("ansatz coefficient with imaginary part {x}"),
        });
    }
    let (b, c) = sol[..nu].split_at(n);
    Ok((b.to_vec(), c.to_vec()))
}

/// Gauss-Jordan elimination on an augmented system with a unique solution.
fn solve_exact(mut rows: Vec<Vec<Rational>>, nvar: usize) -> std::result::Result<Vec<Rational>, String> {
    let mut r = 0;
    for col in 0..nvar {
        let Some(pr) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            return Err(format!("no pivot in column {col}"));
        };
        rows.swap(r, pr);
        let pv = rows[r][col].clone();
        for x in rows[r].iter_mut() {
            *x /= &pv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        r += 1;
    }
    if let Some(row) = rows[r..].iter().find(|row| !row[nvar].is_zero()) {
        return Err(format!("residual equation with right-hand side {}", row[nvar]));
    }
    Ok(rows[..nvar].iter().map(|row| row[nvar].clone()).collect())
}

/// Output of [`run_hte`].
#[derive(Debug, Clone, PartialEq)]
pub struct HteResult {
    /// `a_1 … a_N` in partial-fraction form.
    pub ansatz: Vec<PoleRational>,
    /// `(b_{n,j}, c_{n,j})` for each order.
    pub ansatz_coefficients: Vec<(Vec<Rational>, Vec<Rational>)>,
    /// `c_1 … c_N` of `f/T = -log 3 + Σ c_n βⁿ`.
    pub free_energy: Vec<Rational>,
    /// `C_n = n(1-n) c_n`, same indexing as `free_energy`.
    pub specific_heat: Vec<Rational>,
}

impl HteResult {
    pub fn order(&self) -> usize {
        self.free_energy.len()
    }

    /// `f/T` at `β = J/T`, including `-log 3`.
    pub fn free_energy_over_t(&self, beta: f64) -> f64 {
        -3f64.ln() + eval_poly(&self.free_energy, beta, 1)
    }

    pub fn free_energy_at(&self, coupling: f64, temperature: f64) -> f64 {
        temperature * self.free_energy_over_t(coupling / temperature)
    }

    pub fn specific_heat_at(&self, coupling: f64, temperature: f64) -> f64 {
        eval_poly(&self.specific_heat, coupling / temperature, 1)
    }

    /// Specific-heat coefficients indexed from order 0 (for Padé).
    pub fn specific_heat_series(&self) -> Vec<Rational> {
        std::iter::once(Rational::zero())
            .chain(self.specific_heat.iter().cloned())
            .collect()
    }
}

/// `Σ_k c_k x^{k+first}` for coefficients starting at exponent `first`.
fn eval_poly(c: &[Rational], x: f64, first: i32) -> f64 {
    c.iter()
        .enumerate()
        .map(|(k, ck)| to_f64(ck) * x.powi(k as i32 + first))
        .sum()
}

/// `C_n = n(1-n) c_n`, the image of `C = -T ∂²f/∂T²` on `f/T = Σ c_n (J/T)ⁿ`.
pub fn specific_heat_coefficients(free_energy: &[Rational]) -> Vec<Rational> {
    free_energy
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let n = k as i64 + 1;
            c * int(n * (1 - n))
        })
        .collect()
}

/// Runs the expansion through `order_max`.
pub fn run_hte(order_max: usize) -> Result<HteResult> {
    if order_max == 0 || order_max > MAX_ORDER {
        return Err(Error::InvalidParams(format!(
            "order must lie in 1..={MAX_ORDER}, got {order_max}"
        )));
    }
    let mut a: Vec<PoleRational> = Vec::new();
    let mut r = vec![PoleRational::constant(Gaussian::one())];
    let mut coefficients = Vec::new();
    for n in 1..=order_max {
        let rhs = contour_residue_rhs(n, &a)?;
        let lower = exp_lower(n, &a, &r);
        let (b, c) = match_ansatz(n, &rhs, &lower)?;
        let an = PoleRational::from_ansatz(n, &b, &c);
        r.push(an.add(&lower));
        a.push(an);
        coefficients.push((b, c));
    }
    let zero = Gaussian::zero();
    let mut free_energy = Vec::with_capacity(order_max);
    for (k, an) in a.iter().enumerate() {
        let v = an.eval(&zero)?;
        if !v.im.is_zero() {
            return Err(Error::Inconsistent {
                order: k + 1,
                detail: format!("a_n(0) = {v} is not real"),
            });
        }
        let shift = if k == 0 { int(1) } else { int(0) };
        free_energy.push(-v.re - shift);
    }
    let specific_heat = specific_heat_coefficients(&free_energy);
    Ok(HteResult {
        ansatz: a,
        ansatz_coefficients: coefficients,
        free_energy,
        specific_heat,
    })
}

/// `[m/n]` Padé approximant `P(x)/Q(x)` with `Q(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pade {
    pub numerator: Vec<Rational>,
    pub denominator: Vec<Rational>,
    /// Set when the requested table entry was singular and `[m-1/n]` was
    /// used instead.
    pub degenerate: bool,
}

impl Pade {
    pub fn m(&self) -> usize {
        self.numerator.len() - 1
    }

    pub fn n(&self) -> usize {
        self.denominator.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let horner = |c: &[Rational]| c.iter().rev().fold(0.0, |acc, ck| acc * x + to_f64(ck));
        horner(&self.numerator) / horner(&self.denominator)
    }
}

/// `[m/n]` Padé approximant of `Σ_k c_k x^k` (`c` indexed from order 0).
pub fn pade(c: &[Rational], m: usize, n: usize) -> Result<Pade> {
    if c.is_empty() || m + n > c.len() - 1 {
        return Err(Error::InvalidParams(format!(
            "[{m}/{n}] needs {} coefficients, got {}",
            m + n + 1,
            c.len()
        )));
    }
    let coef = |k: i64| if k < 0 { Rational::zero() } else { c[k as usize].clone() };
    let mut degenerate = false;
    let mut mm = m;
    let q = loop {
        // Σ_{j=1}^{n} q_j c_{k-j} = -c_k, k = mm+1..mm+n
        let rows: Vec<Vec<Rational>> = (mm + 1..=mm + n)
            .map(|k| {
                let mut row: Vec<Rational> = (1..=n).map(|j| coef(k as i64 - j as i64)).collect();
                row.push(-coef(k as i64));
                row
            })
            .collect();
        match solve_exact(rows, n) {
            Ok(sol) => break sol,
            Err(_) if mm > 0 => {
                degenerate = true;
                mm -= 1;
            }
            Err(detail) => {
                return Err(Error::InvalidParams(format!(
                    "no [{m}/{n}] Padé approximant down to [0/{n}] for this series: {detail}"
                )))
            }
        }
    };
    let mut denominator = vec![Rational::one()];
    denominator.extend(q);
    let numerator = (0..=mm)
        .map(|k| (0..=k.min(n)).fold(Rational::zero(), |acc, j| acc + &denominator[j] * coef((k - j) as i64)))
        .collect();
    Ok(Pade {
        numerator,
        denominator,
        degenerate,
    })
}

/// Decimal rendering helper: numerator and denominator strings.
pub fn rational_parts(q: &Rational) -> (String, String) {
    (q.numer().to_string(), q.denom().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::parse;

    fn r(s: &str) -> Rational {
        parse(s).unwrap()
    }

    fn one_over(k: i64) -> PoleRational {
        // 1/(v² + k²/4)
        let (b, c) = if k == 2 { (int(1), int(0)) } else { (int(0), int(1)) };
        PoleRational::from_ansatz(1, &[b], &[c])
    }

    #[test]
    fn gaussian_arithmetic() {
        let z = Gaussian::new(frac(1, 2), frac(-3, 4));
        let w = &z * &z.inv();
        assert_eq!(w, Gaussian::one());
        assert_eq!(Gaussian::half_i(2).pow(2), Gaussian::real(int(-1)));
    }

    #[test]
    fn shift_examples() {
        // 1/(v²+1) at v = y + i is 1/(y(y+2i)); residue 1/(2i)
        let f = one_over(2);
        let l = shift_laurent(&f, &int(1), 2).unwrap();
        assert_eq!(l.order(), Some(-1));
        assert_eq!(l.coefficient(-1), Gaussian::new(int(0), frac(-1, 2)));
        // 1/(v²+9/4) is analytic at i
        let g = one_over(3);
        let l = shift_laurent(&g, &int(1), 2).unwrap();
        assert_eq!(l.low, 0);
        assert!(shift_laurent(&g, &frac(1, 3), 2).is_err());
        // exponent of the known function shifted by i/2: pole of order 1
        let l = shift_laurent(&known_exponent(), &frac(1, 2), 1).unwrap();
        assert_eq!(l.order(), Some(-1));
    }

    #[test]
    fn laurent_matches_evaluation() {
        let f = one_over(2).add(&one_over(3).scale(&frac(2, 3))).mul(&one_over(3));
        let l = shift_laurent(&f, &frac(1, 2), 6).unwrap();
        let y = Gaussian::new(frac(1, 50), frac(1, 70));
        let center = Gaussian::half_i(1);
        let exact = f.eval(&(&center + &y)).unwrap().to_c64();
        let yc = y.to_c64();
        let approx: Complex64 = (l.low..=l.valid)
            .map(|e| l.coefficient(e).to_c64() * yc.powi(e as i32))
            .sum();
        assert!((exact - approx).norm() < 1e-9, "{exact} {approx}");
    }

    #[test]
    fn product_by_hand() {
        // (1 + β v²/(v²+1))(1 - β v²/(v²+1)) = 1 - β² v⁴/(v²+1)²
        let x = PoleRational::constant(Gaussian::one()).sub(&one_over(2));
        let one = PoleRational::constant(Gaussian::one());
        let p = BetaSeries::new(vec![one.clone(), x.clone(), PoleRational::zero()]);
        let m = BetaSeries::new(vec![one.clone(), x.scale(&int(-1)), PoleRational::zero()]);
        let prod = p.mul(&m).unwrap();
        assert_eq!(prod.coeffs[0], one);
        assert!(prod.coeffs[1].is_zero());
        assert_eq!(prod.coeffs[2], x.mul(&x).scale(&int(-1)));
        let z = Gaussian::real(frac(3, 7));
        let v4 = &z.pow(4) * &(&z.pow(2) + &Gaussian::one()).pow(2).inv();
        assert_eq!(prod.coeffs[2].eval(&z).unwrap(), -&v4);
    }

    #[test]
    fn reciprocal_and_log_exp() {
        let x = BetaSeries::new(vec![
            PoleRational::constant(Gaussian::real(int(3))),
            one_over(2),
            one_over(3).scale(&frac(-1, 2)),
            one_over(2).mul(&one_over(3)),
        ]);
        let inv = x.reciprocal().unwrap();
        let unit = x.mul(&inv).unwrap();
        assert_eq!(unit.coeffs[0], PoleRational::constant(Gaussian::one()));
        assert!(unit.coeffs[1..].iter().all(PoleRational::is_zero));
        let l = x.log().unwrap();
        assert_eq!(l.log_of, Some(int(3)));
        assert_eq!(l.exp().unwrap(), x);
        assert!(BetaSeries::new(vec![one_over(2)]).reciprocal().is_err());
    }

    #[test]
    fn order_zero_rhs_is_q() {
        assert_eq!(
            contour_residue_rhs(0, &[]).unwrap(),
            PoleRational::constant(Gaussian::real(int(3)))
        );
    }

    #[test]
    fn first_two_orders() {
        let res = run_hte(2).unwrap();
        assert_eq!(res.ansatz_coefficients[0], (vec![frac(-2, 3)], vec![frac(-1, 3)]));
        assert_eq!(
            res.ansatz_coefficients[1],
            (
                vec![frac(4 * 77, 405), frac(4 * 32, 405)],
                vec![frac(-4 * 27, 405), frac(-4 * 32, 405)]
            )
        );
        assert_eq!(res.free_energy, vec![frac(-5, 27), frac(-172, 243)]);
        assert_eq!(res.specific_heat, vec![int(0), frac(344, 243)]);
    }

    #[test]
    fn ansatz_round_trip() {
        let b = vec![r("-9097/3"), r("5"), r("0"), r("7/11")];
        let c = vec![r("1"), r("-2/9"), r("4"), r("0")];
        let f = PoleRational::from_ansatz(4, &b, &c);
        assert_eq!(f.ansatz_coefficients(4).unwrap(), (b, c));
        assert!(f.shift(1).ansatz_coefficients(4).is_err());
    }

    #[test]
    fn pade_geometric() {
        let c = vec![int(1), int(1), int(1), int(1)];
        let p = pade(&c, 0, 1).unwrap();
        assert_eq!(p.numerator, vec![int(1)]);
        assert_eq!(p.denominator, vec![int(1), int(-1)]);
        assert!((p.eval(0.3) - 1.0 / 0.7).abs() < 1e-15);
        assert!(pade(&c, 2, 2).is_err());
    }

    #[test]
    fn pade_degenerate_falls_back() {
        // even series: [1/1] has a singular Hankel system
        let c = vec![int(1), int(0), int(1)];
        let p = pade(&c, 1, 1).unwrap();
        assert!(p.degenerate);
        assert_eq!(p.m(), 0);
    }

    #[test]
    fn rejects_orders() {
        assert!(run_hte(0).is_err());
        assert!(run_hte(MAX_ORDER + 1).is_err());
    }
}
