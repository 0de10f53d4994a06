//! Scalar fields: double-precision complex numbers and exact Gaussian
//! rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Double-precision complex scalar.
pub type C64 = Complex<f64>;

/// Exact complex scalar with arbitrary-precision rational parts.
pub type ExactComplex = Complex<BigRational>;

/// The operations the dense linear algebra needs from a scalar field.
///
/// By-reference arithmetic is exposed as methods so generic code can avoid
/// cloning big rationals on every product.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    /// `true` when arithmetic never rounds.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn imag_unit() -> Self;
    fn from_i64(n: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    /// Converts a model parameter, refusing inexact values in exact fields.
    fn from_param(p: &Param) -> Result<Self>;
    /// Only the floating field accepts an arbitrary double.
    fn from_c64(z: C64) -> Option<Self>;

    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    /// Division by a nonzero element.
    fn div_ref(&self, rhs: &Self) -> Self;
    fn conj(&self) -> Self;

    /// Exact test for the additive identity.
    fn is_zero(&self) -> bool;
    /// Exact fields ignore `tol`.
    fn is_negligible(&self, tol: f64) -> bool;
    /// Pivot preference: larger is better. Magnitude for floats, negative
    /// bit size for exact values (keeps fill-in small).
    fn pivot_score(&self) -> f64;
    fn to_c64(&self) -> C64;
}

impl Field for C64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn imag_unit() -> Self {
        C64::new(0.0, 1.0)
    }
    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn from_rational(r: &BigRational) -> Self {
        C64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn from_param(p: &Param) -> Result<Self> {
        Ok(C64::new(p.to_f64(), 0.0))
    }
    fn from_c64(z: C64) -> Option<Self> {
        Some(z)
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn div_ref(&self, rhs: &Self) -> Self {
        self / rhs
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn pivot_score(&self) -> f64 {
        self.norm()
    }
    fn to_c64(&self) -> C64 {
        *self
    }
}

/// Number of bits needed to write a rational (numerator plus denominator).
pub fn rational_bits(r: &BigRational) -> u64 {
    r.numer().bits() + r.denom().bits()
}

/// Bits of the real and imaginary parts combined.
pub fn exact_bits(z: &ExactComplex) -> u64 {
    rational_bits(&z.re) + rational_bits(&z.im)
}

impl Field for ExactComplex {
    const EXACT: bool = true;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }
    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }
    fn from_i64(n: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }
    fn from_rational(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }
    fn from_param(p: &Param) -> Result<Self> {
        match p {
            Param::Rational(r) => Ok(Self::from_rational(r)),
            Param::Real(x) => Err(Error::IrrationalParameter(format!(
                "{x} is not an exact rational; supply it as \"p/q\" or a decimal string"
            ))),
        }
    }
    fn from_c64(_z: C64) -> Option<Self> {
        None
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        if self.im.is_zero() && rhs.im.is_zero() {
            return Complex::new(&self.re * &rhs.re, BigRational::zero());
        }
        self * rhs
    }
    fn div_ref(&self, rhs: &Self) -> Self {
        if rhs.im.is_zero() {
            return Complex::new(&self.re / &rhs.re, &self.im / &rhs.re);
        }
        self / rhs
    }
    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        Field::is_zero(self)
    }
    fn pivot_score(&self) -> f64 {
        -(exact_bits(self) as f64)
    }
    fn to_c64(&self) -> C64 {
        C64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// A model parameter: either an exact rational or a plain double.
#[derive(Clone, Debug, PartialEq)]
pub enum Param {
    Rational(BigRational),
    Real(f64),
}

impl Param {
    pub fn to_f64(&self) -> f64 {
        match self {
            Param::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Param::Real(x) => *x,
        }
    }

    pub fn rational(numer: i64, denom: i64) -> Self {
        Param::Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Param::Rational(r) => r.is_positive(),
            Param::Real(x) => *x > 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Param::Rational(r) => r.is_zero(),
            Param::Real(x) => *x == 0.0,
        }
    }
}

impl From<f64> for Param {
    fn from(x: f64) -> Self {
        Param::Real(x)
    }
}

impl From<i64> for Param {
    fn from(n: i64) -> Self {
        Param::Rational(BigRational::from_integer(BigInt::from(n)))
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Rational(r) => write!(f, "{r}"),
            Param::Real(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Param {
    type Err = Error;

    /// Accepts `p/q`, integers and decimal literals (with optional exponent);
    /// all of these are parsed exactly.
    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s).map(Param::Rational)
    }
}

/// Parses `p/q`, `-12`, `0.125` or `1.5e-3` into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("`{s}` is not a rational number"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = s[pos + 1..].parse().map_err(|_| bad())?;
            (&s[..pos], e)
        }
        None => (s, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    if negative {
        numer = -numer;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

/// Formats an exact rational as `p/q` (or `p` when integral).
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn parses_fractions_and_decimals_exactly() {
        assert_eq!(parse_rational("1/2").unwrap(), q(1, 2));
        assert_eq!(parse_rational("0.5").unwrap(), q(1, 2));
        assert_eq!(parse_rational("-1.25e-1").unwrap(), q(-1, 8));
        assert_eq!(parse_rational("3").unwrap(), q(3, 1));
        assert_eq!(parse_rational("2e2").unwrap(), q(200, 1));
        assert!(parse_rational("sqrt(2)").is_err());
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn exact_field_refuses_real_params() {
        assert!(ExactComplex::from_param(&Param::Real(0.5)).is_err());
        assert_eq!(
            ExactComplex::from_param(&Param::rational(1, 2)).unwrap(),
            Complex::new(q(1, 2), q(0, 1))
        );
    }

    #[test]
    fn exact_arithmetic_is_closed() {
        let a = Complex::new(q(1, 3), q(-2, 5));
        let b = Complex::new(q(7, 2), q(1, 9));
        let prod = a.mul_ref(&b);
        assert_eq!(prod.div_ref(&b), a);
        assert_eq!(a.conj().conj(), a);
        assert_eq!(a.add_ref(&b).sub_ref(&b), a);
    }

    #[test]
    fn conjugation_is_an_involution_for_floats() {
        let z = C64::new(0.3, -1.7);
        assert_eq!(Field::conj(&Field::conj(&z)), z);
    }
}
