//! Scalar abstractions shared by every computation in the crate.
//!
//! Two arithmetic modes run through the same generic code: exact mode uses
//! arbitrary precision rationals ([`Rational`]) and numeric mode uses `f64`.
//! Series and determinant machinery additionally accepts complex weights.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Arbitrary precision rational number used in exact mode.
pub type Rational = BigRational;

/// Field element usable as a coefficient of series, polynomials and matrices.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// `true` when arithmetic is exact and equality is decidable.
    const EXACT: bool;

    fn from_i64(n: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    fn half() -> Self {
        Self::from_ratio(1, 2)
    }

    /// Absolute value as a float, used for bounds and pivoting.
    fn modulus(&self) -> f64;

    fn to_complex(&self) -> Complex64;

    /// Denominator of an exact rational value, if the type has one.
    fn denominator_hint(&self) -> Option<BigInt> {
        None
    }

    /// Zero test: exact zero in exact mode, `|x| < eps` otherwise.
    fn is_negligible(&self, eps: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.modulus() < eps
        }
    }
}

/// Ordered scalar usable as a coordinate on the real line.
pub trait Real: Scalar + PartialOrd + Signed + Display {
    fn as_f64(&self) -> f64;

    /// Exact conversion from a float; `None` for non-finite input.
    fn from_f64(x: f64) -> Option<Self>;

    /// Equality up to `eps` in numeric mode, exact equality otherwise.
    fn near(&self, other: &Self, eps: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.clone() - other.clone()).modulus() <= eps
        }
    }

    fn midpoint(&self, other: &Self) -> Self {
        (self.clone() + other.clone()) * Self::half()
    }

    fn is_finite_value(&self) -> bool {
        self.as_f64().is_finite() || Self::EXACT
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn modulus(&self) -> f64 {
        self.abs()
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(*self, 0.0)
    }
}

impl Real for f64 {
    fn as_f64(&self) -> f64 {
        *self
    }

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Rational::new(BigInt::from(num), BigInt::from(den))
    }

    fn modulus(&self) -> f64 {
        ToPrimitive::to_f64(&self.abs()).unwrap_or(f64::INFINITY)
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(ToPrimitive::to_f64(self).unwrap_or(f64::NAN), 0.0)
    }

    fn denominator_hint(&self) -> Option<BigInt> {
        Some(self.denom().clone())
    }
}

impl Real for Rational {
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn from_f64(x: f64) -> Option<Self> {
        Rational::from_float(x)
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_i64(n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// Exact complex rationals, for complex weights in exact mode.
pub type ComplexRational = Complex<Rational>;

impl Scalar for ComplexRational {
    const EXACT: bool = true;

    fn from_i64(n: i64) -> Self {
        Complex::new(Rational::from_i64(n), Rational::zero())
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(Rational::from_ratio(num, den), Rational::zero())
    }

    fn modulus(&self) -> f64 {
        self.to_complex().norm()
    }

    fn to_complex(&self) -> Complex64 {
        Complex64::new(Real::as_f64(&self.re), Real::as_f64(&self.im))
    }

    fn denominator_hint(&self) -> Option<BigInt> {
        Some(num_integer::Integer::lcm(self.re.denom(), self.im.denom()))
    }
}

/// Parses `"p/q"`, `"n"` or a plain decimal string such as `"0.25"` into an
/// exact rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let num: BigInt = num.trim().parse().ok()?;
        let den: BigInt = den.trim().parse().ok()?;
        if den.is_zero() {
            return None;
        }
        return Some(Rational::new(num, den));
    }
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let mantissa: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = Rational::new(mantissa, scale);
    Some(if negative { -value } else { value })
}

/// Formats a rational as `"p/q"` (or `"n"` for integers).
pub fn format_rational(x: &Rational) -> String {
    x.to_string()
}
