//! Small helpers around [`BigRational`]: combinatorics, conversion to `f64`
//! and a canonical `num/den` text form.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, ParseBigIntError};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Nearest `f64`, computed without overflowing on huge numerators or
/// denominators.
pub fn to_f64(q: &Rational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Shift both to ~60 significant bits first.
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift_n = (nb - 60).max(0);
    let shift_d = (db - 60).max(0);
    let n = (q.numer().abs() >> shift_n as usize).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift_d as usize).to_f64().unwrap_or(1.0);
    let sign = if q.is_negative() { -1.0 } else { 1.0 };
    sign * n / d * 2f64.powi((shift_n - shift_d) as i32)
}

/// Canonical text form: `"-5/27"`, or just `"3"` for integers.
pub fn to_string(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseRationalError {
    Empty,
    Integer(String),
    ZeroDenominator,
}

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => write!(f, "empty rational literal"),
            Self::Integer(e) => write!(f, "bad integer part: {e}"),
            Self::ZeroDenominator => write!(f, "zero denominator"),
        }
    }
}

impl std::error::Error for ParseRationalError {}

impl From<ParseBigIntError> for ParseRationalError {
    fn from(e: ParseBigIntError) -> Self {
        Self::Integer(e.to_string())
    }
}

/// Parses the `num/den` (or bare integer) form produced by [`to_string`].
/// Surrounding whitespace is ignored; the result is reduced.
pub fn parse(s: &str) -> Result<Rational, ParseRationalError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    if n.is_empty() || d.is_empty() {
        return Err(ParseRationalError::Empty);
    }
    let num = BigInt::from_str(n)?;
    let den = BigInt::from_str(d)?;
    if den.is_zero() {
        return Err(ParseRationalError::ZeroDenominator);
    }
    Ok(Rational::new(num, den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 1), BigInt::from(3));
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(9, 4), BigInt::from(126));
        assert_eq!(binomial(2, 3), BigInt::zero());
    }

    #[test]
    fn huge_to_f64() {
        let q = parse("48290843858722808551/693437215072135939020").unwrap();
        let x = to_f64(&q);
        assert!((x - 0.069_639_821_470_642).abs() < 1e-9, "{x}");
        let big = Rational::new(factorial(200), factorial(199));
        assert_eq!(to_f64(&big), 200.0);
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse(""), Err(ParseRationalError::Empty));
        assert_eq!(parse("1/0"), Err(ParseRationalError::ZeroDenominator));
        assert!(parse("1/x").is_err());
        assert!(parse("/3").is_err());
        assert_eq!(parse(" -10/4 ").unwrap(), frac(-5, 2));
    }

    proptest! {
        #[test]
        fn text_form_round_trips(n in any::<i64>(), d in 1i64..i64::MAX) {
            let q = frac(n, d);
            prop_assert_eq!(parse(&to_string(&q)).unwrap(), q);
        }
    }
}
