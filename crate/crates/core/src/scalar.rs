//! Scalar abstractions.
//!
//! Two families of numbers flow through the crate. [`Scalar`] covers the
//! floating-point types (`f32`, `f64`) used by the eigen solvers, sphere
//! searches and quadrature. [`PolyScalar`] is the weaker bound needed to
//! evaluate a polynomial map and its derivatives, and is also implemented for
//! exact rationals so that counting and Hessian extraction can stay exact.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{Add, AddAssign, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, FromPrimitive, One, ToPrimitive, Zero};

/// Floating point: `f32` or `f64`.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant. Never fails for finite inputs.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Values a rational-coefficient polynomial can be evaluated at.
pub trait PolyScalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(r: &BigRational) -> Self;

    fn approx_f64(&self) -> f64;
}

impl PolyScalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn approx_f64(&self) -> f64 {
        *self
    }
}

impl PolyScalar for f32 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn approx_f64(&self) -> f64 {
        *self as f64
    }
}

impl PolyScalar for BigRational {
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn approx_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

/// Exact value of a finite `f64` as a rational (every finite double is dyadic).
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Shorthand for an integer-valued rational.
pub fn int_rational(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p"`, `"p/q"` or a decimal such as `"-0.375"` into an exact
/// rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !int_digits.bytes().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits: BigInt = format!("{int_digits}{frac}").parse().ok()?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let r = BigRational::new(digits, den);
        return Some(if negative { -r } else { r });
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Binomial coefficient C(n, k) for the small arguments used here.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `max(1, ln q)`.
pub fn log_floor1(x: f64) -> f64 {
    x.ln().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 2), 3);
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(1, 2), 0);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(7, 2), 21);
    }

    #[test]
    fn rationals_parse() {
        assert_eq!(parse_rational("3/4"), Some(BigRational::new(3.into(), 4.into())));
        assert_eq!(parse_rational(" -2 "), Some(int_rational(-2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
        assert_eq!(parse_rational("0.3"), Some(BigRational::new(3.into(), 10.into())));
        assert_eq!(parse_rational("-1.25"), Some(BigRational::new((-5).into(), 4.into())));
        assert_eq!(parse_rational(".5"), Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(parse_rational("1."), None);
    }

    #[test]
    fn dyadic_roundtrip() {
        let r = rational_from_f64(0.375).unwrap();
        assert_eq!(r, BigRational::new(3.into(), 8.into()));
        assert_eq!(r.approx_f64(), 0.375);
    }
}
