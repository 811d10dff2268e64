//! Arbitrary-precision rational numbers, always reduced, denominator > 0.
//!
//! Every coefficient in the toolkit is a [`Rational`]; there is no floating
//! point anywhere in the kernel. Decimal literals in input text (`0.2`,
//! `-1.5`) parse to exact fractions.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "rational with zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn from_int(n: i64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::new(BigInt::from(n), BigInt::from(d))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// True when the value is a whole number (denominator 1).
    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.numer().to_i64()
        } else {
            None
        }
    }

    /// Parses an integer or decimal literal (`7`, `-3`, `0.2`, `12.50`).
    pub fn parse_decimal(text: &str) -> Option<Self> {
        let text = text.trim();
        let (sign, digits) = match text.strip_prefix('-') {
            Some(rest) => (-1i32, rest),
            None => (1, text.strip_prefix('+').unwrap_or(text)),
        };
        if digits.is_empty() {
            return None;
        }
        let mut parts = digits.splitn(2, '.');
        let whole = parts.next()?;
        let frac = parts.next().unwrap_or("");
        if whole.is_empty() && frac.is_empty() {
            return None;
        }
        if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let whole_int = if whole.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(whole).ok()?
        };
        let mut numer = whole_int;
        let mut denom = BigInt::one();
        for c in frac.chars() {
            numer = numer * 10 + (c as u8 - b'0');
            denom *= 10;
        }
        if sign < 0 {
            numer = -numer;
        }
        Some(Rational::new(numer, denom))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_int(n)
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

macro_rules! binop {
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
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(self.0 / rhs.0)
    }
}

impl Div<&Rational> for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "division by zero");
        Rational(&self.0 / &rhs.0)
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

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl PartialOrd<i64> for Rational {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        self.partial_cmp(&Rational::from_int(*other))
    }
}

impl PartialEq<i64> for Rational {
    fn eq(&self, other: &i64) -> bool {
        self == &Rational::from_int(*other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_literals_are_exact() {
        assert_eq!(
            Rational::parse_decimal("0.2").unwrap(),
            Rational::ratio(1, 5)
        );
        assert_eq!(
            Rational::parse_decimal("0.1").unwrap(),
            Rational::ratio(1, 10)
        );
        assert_eq!(
            Rational::parse_decimal("-1.5").unwrap(),
            Rational::ratio(-3, 2)
        );
        assert_eq!(
            Rational::parse_decimal("12").unwrap(),
            Rational::from_int(12)
        );
        assert_eq!(
            Rational::parse_decimal(".5").unwrap(),
            Rational::ratio(1, 2)
        );
        assert!(Rational::parse_decimal("1.2.3").is_none());
        assert!(Rational::parse_decimal("x").is_none());
    }

    #[test]
    fn reduced_form() {
        let r = Rational::ratio(4, -6);
        assert_eq!(r, Rational::ratio(-2, 3));
        assert!(r.denom().is_positive());
    }

    #[test]
    fn display_integer_vs_fraction() {
        assert_eq!(Rational::ratio(6, 3).to_string(), "2");
        assert_eq!(Rational::ratio(-1, 2).to_string(), "-1/2");
    }
}
