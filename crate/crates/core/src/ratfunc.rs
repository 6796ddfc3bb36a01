//! Rational functions `p(t) / q(t)` in lowest terms.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::series::PowerSeries;

/// Reduced quotient of polynomials. The denominator is normalized to
/// constant term one when `q(0) != 0`, and to a monic polynomial otherwise,
/// so equal functions have identical representations.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction<F> {
    num: Poly<F>,
    den: Poly<F>,
}

impl<F: Scalar> RationalFunction<F> {
    pub fn new(num: Poly<F>, den: Poly<F>) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return Self { num, den: Poly::one() };
        }
        let g = num.gcd(&den);
        let (mut num, mut den) = if g.degree().unwrap_or(0) > 0 {
            (num.exact_div(&g), den.exact_div(&g))
        } else {
            (num, den)
        };
        let c0 = den.coeff(0);
        let norm = if c0.is_zero() { den.leading() } else { c0 };
        if !norm.is_one() {
            let inv = F::one() / norm;
            num = num.scale(&inv);
            den = den.scale(&inv);
        }
        Self { num, den }
    }

    pub fn from_poly(p: Poly<F>) -> Self {
        Self { num: p, den: Poly::one() }
    }

    pub fn constant(c: F) -> Self {
        Self::from_poly(Poly::constant(c))
    }

    pub fn numerator(&self) -> &Poly<F> {
        &self.num
    }

    pub fn denominator(&self) -> &Poly<F> {
        &self.den
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        self.num.eval_complex(t) / self.den.eval_complex(t)
    }

    pub fn eval(&self, t: &F) -> F {
        self.num.eval(t) / self.den.eval(t)
    }

    /// Taylor coefficients `c_0..c_order` at `t = 0` by long division.
    /// Returns `None` when the function has a pole at the origin.
    pub fn taylor(&self, order: usize) -> Option<Vec<F>> {
        let d0 = self.den.coeff(0);
        if d0.is_zero() {
            return None;
        }
        let inv = F::one() / d0;
        let mut out: Vec<F> = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = self.num.coeff(n);
            let dd = self.den.degree().unwrap_or(0);
            for j in 1..=dd.min(n) {
                acc = acc - self.den.coeff(j) * out[n - j].clone();
            }
            out.push(acc * inv.clone());
        }
        Some(out)
    }

    pub fn to_series(&self, order: usize) -> Option<PowerSeries<F>> {
        self.taylor(order).map(PowerSeries::new)
    }

    pub fn is_zero_fn(&self) -> bool {
        self.num.is_zero()
    }

    pub fn recip(&self) -> Self {
        Self::new(self.den.clone(), self.num.clone())
    }
}

impl<F: Scalar> Zero for RationalFunction<F> {
    fn zero() -> Self {
        Self::from_poly(Poly::zero())
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl<F: Scalar> One for RationalFunction<F> {
    fn one() -> Self {
        Self::from_poly(Poly::one())
    }
}

impl<F: Scalar> Add for RationalFunction<F> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        if self.den == rhs.den {
            return Self::new(self.num + rhs.num, self.den);
        }
        Self::new(
            self.num * rhs.den.clone() + rhs.num * self.den.clone(),
            self.den * rhs.den,
        )
    }
}

impl<F: Scalar> Sub for RationalFunction<F> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl<F: Scalar> Neg for RationalFunction<F> {
    type Output = Self;

    fn neg(self) -> Self {
        Self { num: -self.num, den: self.den }
    }
}

impl<F: Scalar> Mul for RationalFunction<F> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.num * rhs.num, self.den * rhs.den)
    }
}

impl<F: Scalar> Div for RationalFunction<F> {
    type Output = Self;

    fn div(self, rhs: Self) -> Self {
        assert!(!rhs.num.is_zero(), "division by the zero rational function");
        Self::new(self.num * rhs.den, self.den * rhs.num)
    }
}

impl<F: Scalar + fmt::Display> fmt::Display for RationalFunction<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] / [{}]", self.num, self.den)
    }
}
