//! Exact rational scalars used for every probability, expectation, and
//! linear-program coefficient in this crate.
//!
//! All values are stored reduced with a positive denominator and printed
//! in the `num/den` form (`"3/4"`, `"-1/2"`, `"2/1"`). There is no
//! floating-point path anywhere: contextuality verdicts sit on strict
//! inequalities, so a tolerance would corrupt boundary cases.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An arbitrary-precision rational number, always stored reduced with a
/// positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

/// Error produced when a rational string cannot be parsed.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational string")]
    Empty,
    #[error("invalid integer in rational: {0:?}")]
    BadInteger(String),
    #[error("zero denominator in rational: {0:?}")]
    ZeroDenominator(String),
}

impl Rational {
    /// Builds `num/den` from machine integers.
    ///
    /// Panics if `den == 0`; use [`Rational::from_str`] for untrusted input.
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    /// True when the value lies in the closed unit interval, i.e. is a
    /// valid probability.
    pub fn is_probability(&self) -> bool {
        !self.is_negative() && self.0 <= BigRational::one()
    }
}

impl fmt::Display for Rational {
    /// Always renders as `num/den`, including a denominator of 1, so the
    /// textual form round-trips without a separate integer case.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    /// Accepts `"num/den"` or a bare integer `"num"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let (num_str, den_str) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let num = BigInt::from_str(num_str)
            .map_err(|_| ParseRationalError::BadInteger(s.to_string()))?;
        let den = BigInt::from_str(den_str)
            .map_err(|_| ParseRationalError::BadInteger(s.to_string()))?;
        if den.is_zero() {
            return Err(ParseRationalError::ZeroDenominator(s.to_string()));
        }
        Ok(Rational(BigRational::new(num, den)))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

macro_rules! impl_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((self.0).$method(rhs.0))
            }
        }
        impl $trait<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
    };
}

impl_binop!(Add, add);
impl_binop!(Sub, sub);
impl_binop!(Mul, mul);
impl_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        self.0 -= rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl MulAssign for Rational {
    fn mul_assign(&mut self, rhs: Rational) {
        self.0 *= rhs.0;
    }
}

impl DivAssign<&Rational> for Rational {
    fn div_assign(&mut self, rhs: &Rational) {
        self.0 /= &rhs.0;
    }
}

impl DivAssign for Rational {
    fn div_assign(&mut self, rhs: Rational) {
        self.0 /= rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// Shorthand for `Rational::new` used heavily in tests and examples.
#[macro_export]
macro_rules! rat {
    ($n:expr) => {
        $crate::rational::Rational::from_integer($n)
    };
    ($n:expr, $d:expr) => {
        $crate::rational::Rational::new($n, $d)
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stored_reduced_with_positive_denominator() {
        let r = Rational::new(2, -4);
        assert_eq!(r.to_string(), "-1/2");
        assert_eq!(Rational::new(6, 3), Rational::from_integer(2));
    }

    #[test]
    fn parses_and_displays_num_den() {
        let r: Rational = "3/4".parse().unwrap();
        assert_eq!(r, Rational::new(3, 4));
        assert_eq!(r.to_string(), "3/4");
        let neg: Rational = "-7/2".parse().unwrap();
        assert_eq!(neg, Rational::new(-7, 2));
        let int: Rational = "5".parse().unwrap();
        assert_eq!(int.to_string(), "5/1");
    }

    #[test]
    fn rejects_zero_denominator() {
        assert_eq!(
            "1/0".parse::<Rational>(),
            Err(ParseRationalError::ZeroDenominator("1/0".to_string()))
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!("".parse::<Rational>().is_err());
        assert!("a/b".parse::<Rational>().is_err());
        assert!("1/2/3".parse::<Rational>().is_err());
        assert!("0.5".parse::<Rational>().is_err());
    }

    #[test]
    fn arithmetic_is_exact() {
        let third = Rational::new(1, 3);
        let sum: Rational = (0..3).map(|_| third.clone()).sum();
        assert_eq!(sum, Rational::one());
        assert_eq!(&rat!(3, 5) - &rat!(4, 5), rat!(-1, 5));
        assert_eq!(rat!(2, 3) * rat!(3, 4), rat!(1, 2));
        assert_eq!(rat!(1, 2) / rat!(1, 4), rat!(2));
    }

    #[test]
    fn serde_uses_num_den_strings() {
        let r = Rational::new(3, 4);
        assert_eq!(serde_json::to_string(&r).unwrap(), "\"3/4\"");
        let back: Rational = serde_json::from_str("\"3/4\"").unwrap();
        assert_eq!(back, r);
        assert!(serde_json::from_str::<Rational>("\"1/0\"").is_err());
    }

    #[test]
    fn probability_range_check() {
        assert!(rat!(0).is_probability());
        assert!(rat!(1).is_probability());
        assert!(rat!(1, 2).is_probability());
        assert!(!rat!(-1, 2).is_probability());
        assert!(!rat!(3, 2).is_probability());
    }
}
