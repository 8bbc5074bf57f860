//! Exact scalars from the field Q(√2).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Arbitrary-precision rational, always stored reduced with a positive
/// denominator (num-rational maintains both).
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// An element `a + b*sqrt(2)` of Q(√2).
///
/// Q(√2) is a field: products close under
/// `(a + b√2)(c + d√2) = (ac + 2bd) + (ad + bc)√2`, and every nonzero
/// element has an exact inverse since `a² − 2b² = 0` forces `a = b = 0`
/// over the rationals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coeff {
    pub a: Rational,
    pub b: Rational,
}

impl Coeff {
    pub fn new(a: Rational, b: Rational) -> Self {
        Coeff { a, b }
    }

    pub fn zero() -> Self {
        Coeff::new(Rational::zero(), Rational::zero())
    }

    pub fn one() -> Self {
        Coeff::new(Rational::one(), Rational::zero())
    }

    pub fn from_int(n: i64) -> Self {
        Coeff::new(rat_int(n), Rational::zero())
    }

    pub fn from_rational(r: Rational) -> Self {
        Coeff::new(r, Rational::zero())
    }

    /// The element √2.
    pub fn sqrt2() -> Self {
        Coeff::new(Rational::zero(), Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// Exact inverse. Panics on zero; callers gate on `is_zero`.
    pub fn inv(&self) -> Self {
        let norm = &self.a * &self.a - rat_int(2) * &self.b * &self.b;
        assert!(!norm.is_zero(), "inverse of zero in Q(sqrt2)");
        Coeff::new(&self.a / &norm, -&self.b / &norm)
    }

    pub fn div(&self, rhs: &Coeff) -> Self {
        self * &rhs.inv()
    }

    pub fn pow(&self, n: i32) -> Self {
        let base = if n < 0 { self.inv() } else { self.clone() };
        let mut acc = Coeff::one();
        for _ in 0..n.unsigned_abs() {
            acc = &acc * &base;
        }
        acc
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * std::f64::consts::SQRT_2
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64()
        .unwrap_or_else(|| r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN))
}

impl Add for &Coeff {
    type Output = Coeff;
    fn add(self, rhs: &Coeff) -> Coeff {
        Coeff::new(&self.a + &rhs.a, &self.b + &rhs.b)
    }
}

impl Sub for &Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &Coeff) -> Coeff {
        Coeff::new(&self.a - &rhs.a, &self.b - &rhs.b)
    }
}

impl Mul for &Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &Coeff) -> Coeff {
        let a = &self.a * &rhs.a + rat_int(2) * &self.b * &rhs.b;
        let b = &self.a * &rhs.b + &self.b * &rhs.a;
        Coeff::new(a, b)
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff::new(-&self.a, -&self.b)
    }
}

fn fmt_rational(r: &Rational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if r.denom().is_one() {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Prints in the expression grammar: `3`, `-1/2`, `sqrt2`, `3/2*sqrt2`,
/// `(1 + sqrt2)`, `(2 - 1/2*sqrt2)`. Mixed elements are parenthesized so the
/// output stays reparseable in product context.
impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => fmt_rational(&self.a, f),
            (true, false) => {
                if self.b.is_one() {
                    write!(f, "sqrt2")
                } else if (-&self.b).is_one() {
                    write!(f, "-sqrt2")
                } else {
                    fmt_rational(&self.b, f)?;
                    write!(f, "*sqrt2")
                }
            }
            (false, false) => {
                write!(f, "(")?;
                fmt_rational(&self.a, f)?;
                let babs = self.b.abs();
                write!(f, " {} ", if self.b.is_negative() { "-" } else { "+" })?;
                if !babs.is_one() {
                    fmt_rational(&babs, f)?;
                    write!(f, "*")?;
                }
                write!(f, "sqrt2)")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_closes_in_the_field() {
        let x = Coeff::new(rat(1, 2), rat(3, 4));
        let y = Coeff::new(rat(-2, 1), rat(1, 3));
        let p = &x * &y;
        // (1/2 + 3/4 s)(-2 + 1/3 s) = (-1 + 2*(3/4)(1/3)) + (1/6 - 3/2)s
        assert_eq!(p.a, rat(-1, 2));
        assert_eq!(p.b, rat(-4, 3));
    }

    #[test]
    fn sqrt2_squares_to_two() {
        let s = Coeff::sqrt2();
        assert_eq!(&s * &s, Coeff::from_int(2));
    }

    #[test]
    fn inverse_is_exact() {
        let x = Coeff::new(rat(3, 5), rat(-7, 2));
        assert_eq!(&x * &x.inv(), Coeff::one());
        let s = Coeff::sqrt2();
        assert_eq!(s.inv(), Coeff::new(rat_int(0), rat(1, 2)));
    }

    #[test]
    fn zero_iff_both_parts_zero() {
        assert!(Coeff::zero().is_zero());
        assert!(!Coeff::sqrt2().is_zero());
        assert!(!Coeff::new(rat_int(1), rat_int(-1)).is_zero());
    }

    #[test]
    fn display_forms() {
        assert_eq!(Coeff::from_int(3).to_string(), "3");
        assert_eq!(Coeff::new(rat(-1, 2), rat_int(0)).to_string(), "-1/2");
        assert_eq!(Coeff::sqrt2().to_string(), "sqrt2");
        assert_eq!(Coeff::new(rat_int(0), rat(3, 2)).to_string(), "3/2*sqrt2");
        assert_eq!(Coeff::new(rat_int(1), rat_int(1)).to_string(), "(1 + sqrt2)");
        assert_eq!(Coeff::new(rat_int(2), rat(-1, 2)).to_string(), "(2 - 1/2*sqrt2)");
    }
}
