//! Exact rational arithmetic on `i64` numerator/denominator pairs.
//!
//! All exponent calculus goes through this type so that theoretical
//! predictions are bit-exact. Overflow in an intermediate product is a
//! hard error rather than a silent wrap.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RationalError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("overflow in 64-bit rational arithmetic")]
    Overflow,
}

/// A normalized fraction: gcd(num, den) = 1, den > 0.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };

    pub fn new(num: i64, den: i64) -> Result<Rational, RationalError> {
        if den == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        let g = gcd(num, den);
        let (mut num, mut den) = if g == 0 { (0, 1) } else { (num / g, den / g) };
        if den < 0 {
            num = num.checked_neg().ok_or(RationalError::Overflow)?;
            den = den.checked_neg().ok_or(RationalError::Overflow)?;
        }
        Ok(Rational { num, den })
    }

    pub fn from_int(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn checked_add(self, rhs: Rational) -> Result<Rational, RationalError> {
        let a = self
            .num
            .checked_mul(rhs.den)
            .ok_or(RationalError::Overflow)?;
        let b = rhs
            .num
            .checked_mul(self.den)
            .ok_or(RationalError::Overflow)?;
        let num = a.checked_add(b).ok_or(RationalError::Overflow)?;
        let den = self
            .den
            .checked_mul(rhs.den)
            .ok_or(RationalError::Overflow)?;
        Rational::new(num, den)
    }

    pub fn checked_sub(self, rhs: Rational) -> Result<Rational, RationalError> {
        self.checked_add(Rational {
            num: rhs.num.checked_neg().ok_or(RationalError::Overflow)?,
            den: rhs.den,
        })
    }

    pub fn checked_mul(self, rhs: Rational) -> Result<Rational, RationalError> {
        // Cross-reduce first to keep intermediates small.
        let g1 = gcd(self.num, rhs.den).max(1);
        let g2 = gcd(rhs.num, self.den).max(1);
        let num = (self.num / g1)
            .checked_mul(rhs.num / g2)
            .ok_or(RationalError::Overflow)?;
        let den = (self.den / g2)
            .checked_mul(rhs.den / g1)
            .ok_or(RationalError::Overflow)?;
        Rational::new(num, den)
    }

    pub fn checked_div(self, rhs: Rational) -> Result<Rational, RationalError> {
        if rhs.num == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        self.checked_mul(Rational {
            num: rhs.den,
            den: rhs.num,
        })
    }

    pub fn is_positive(&self) -> bool {
        self.num > 0
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Rational) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Rational) -> Ordering {
        // Denominators are positive, so cross-multiplication preserves order.
        let lhs = self.num as i128 * other.den as i128;
        let rhs = other.num as i128 * self.den as i128;
        lhs.cmp(&rhs)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn normalization() {
        assert_eq!(r(2, 4), r(1, 2));
        assert_eq!(r(-2, -4), r(1, 2));
        assert_eq!(r(2, -4), r(-1, 2));
        assert_eq!(r(0, 5), Rational::ZERO);
    }

    #[test]
    fn arithmetic() {
        assert_eq!(r(1, 2).checked_add(r(1, 3)).unwrap(), r(5, 6));
        assert_eq!(r(9, 5).checked_sub(r(3, 2)).unwrap(), r(3, 10));
        assert_eq!(r(2, 3).checked_mul(r(3, 4)).unwrap(), r(1, 2));
        assert_eq!(r(1, 2).checked_div(r(3, 2)).unwrap(), r(1, 3));
    }

    #[test]
    fn ordering() {
        assert!(r(9, 5) > r(3, 2));
        assert!(r(-1, 2) < Rational::ZERO);
    }

    #[test]
    fn overflow_is_an_error() {
        let big = Rational::from_int(i64::MAX);
        assert_eq!(big.checked_mul(big), Err(RationalError::Overflow));
        assert_eq!(
            big.checked_add(Rational::from_int(1)),
            Err(RationalError::Overflow)
        );
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(
            r(1, 2).checked_div(Rational::ZERO),
            Err(RationalError::ZeroDenominator)
        );
        assert_eq!(Rational::new(1, 0), Err(RationalError::ZeroDenominator));
    }
}
