//! Truncated formal power series in the variable `t`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use crate::poly::Poly;
use crate::scalar::Scalar;

/// Geometric envelope `|c_n| <= scale * growth^n`, valid for every `n`
/// including the discarded tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub scale: f64,
    pub growth: f64,
}

/// Series `c_0 + c_1 t + ... + c_N t^N + O(t^{N+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<F> {
    coeffs: Vec<F>,
    envelope: Option<Envelope>,
}

impl<F: Scalar> PowerSeries<F> {
    /// Series of order `coeffs.len() - 1`; `coeffs` must be non-empty.
    pub fn new(coeffs: Vec<F>) -> Self {
        assert!(!coeffs.is_empty(), "a series keeps at least the constant term");
        Self { coeffs, envelope: None }
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = Some(envelope);
        self
    }

    pub fn zero_of_order(order: usize) -> Self {
        Self::new(vec![F::zero(); order + 1])
    }

    pub fn one_of_order(order: usize) -> Self {
        let mut c = vec![F::zero(); order + 1];
        c[0] = F::one();
        Self::new(c)
    }

    /// Taylor expansion of a polynomial truncated at `order`.
    pub fn from_poly(p: &Poly<F>, order: usize) -> Self {
        Self::new((0..=order).map(|i| p.coeff(i)).collect())
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> F {
        self.coeffs.get(n).cloned().unwrap_or_else(F::zero)
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.envelope
    }

    /// Upper bound for `|sum_{n > N} c_n r^n|`, available when an envelope is
    /// known and `r * growth < 1`.
    pub fn tail_bound(&self, r: f64) -> Option<f64> {
        let env = self.envelope?;
        let q = env.growth * r;
        if q >= 1.0 {
            return None;
        }
        Some(env.scale * q.powi(self.order() as i32 + 1) / (1.0 - q))
    }

    pub fn truncate(&self, order: usize) -> Self {
        let n = order.min(self.order());
        Self { coeffs: self.coeffs[..=n].to_vec(), envelope: self.envelope }
    }

    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * t + c.to_complex())
    }

    pub fn scale(&self, c: &F) -> Self {
        let envelope = self.envelope.map(|e| Envelope { scale: e.scale * c.modulus(), ..e });
        Self { coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(), envelope }
    }

    /// A truncated series is a unit exactly when its constant term is nonzero.
    pub fn is_unit(&self) -> bool {
        !self.coeffs[0].is_zero()
    }

    /// Multiplicative inverse; `None` when the constant term vanishes.
    pub fn inverse(&self) -> Option<Self> {
        if !self.is_unit() {
            return None;
        }
        let n = self.coeffs.len();
        let inv0 = F::one() / self.coeffs[0].clone();
        let mut out = Vec::with_capacity(n);
        out.push(inv0.clone());
        for k in 1..n {
            let mut acc = F::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * out[k - j].clone();
            }
            out.push(-(acc * inv0.clone()));
        }
        Some(Self::new(out))
    }

    pub fn is_zero_series(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }
}

fn combine_envelopes(a: Option<Envelope>, b: Option<Envelope>) -> Option<Envelope> {
    match (a, b) {
        (Some(a), Some(b)) => Some(Envelope { scale: a.scale + b.scale, growth: a.growth.max(b.growth) }),
        _ => None,
    }
}

impl<F: Scalar> Add for PowerSeries<F> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let n = self.order().min(rhs.order());
        let envelope = combine_envelopes(self.envelope, rhs.envelope);
        Self {
            coeffs: (0..=n).map(|i| self.coeffs[i].clone() + rhs.coeffs[i].clone()).collect(),
            envelope,
        }
    }
}

impl<F: Scalar> Sub for PowerSeries<F> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        let n = self.order().min(rhs.order());
        let envelope = combine_envelopes(self.envelope, rhs.envelope);
        Self {
            coeffs: (0..=n).map(|i| self.coeffs[i].clone() - rhs.coeffs[i].clone()).collect(),
            envelope,
        }
    }
}

impl<F: Scalar> Neg for PowerSeries<F> {
    type Output = Self;

    fn neg(self) -> Self {
        Self { coeffs: self.coeffs.into_iter().map(|c| -c).collect(), envelope: self.envelope }
    }
}

impl<F: Scalar> Mul for PowerSeries<F> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let n = self.order().min(rhs.order());
        let mut out = vec![F::zero(); n + 1];
        for (i, a) in self.coeffs.iter().take(n + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().take(n + 1 - i).enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }
}

impl<F: Scalar> Zero for PowerSeries<F> {
    /// Order-zero zero series; arithmetic truncates to the smaller order, so
    /// callers wanting a specific order use [`PowerSeries::zero_of_order`].
    fn zero() -> Self {
        Self::new(vec![F::zero()])
    }

    fn is_zero(&self) -> bool {
        self.is_zero_series()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use num_traits::One;

    #[test]
    fn inverse_of_one_minus_t_is_geometric() {
        let s = PowerSeries::new(vec![Rational::one(), -Rational::one(), Rational::zero(), Rational::zero()]);
        let inv = s.inverse().unwrap();
        assert!(inv.coeffs().iter().all(|c| c.is_one()));
        let prod = s * inv;
        assert_eq!(prod, PowerSeries::one_of_order(3));
    }

    #[test]
    fn tail_bound_follows_envelope() {
        let s = PowerSeries::new(vec![0.5f64; 11]).with_envelope(Envelope { scale: 0.5, growth: 1.0 });
        let bound = s.tail_bound(0.5).unwrap();
        assert!((bound - 0.5 * 0.5f64.powi(11) / 0.5).abs() < 1e-15);
        assert!(s.tail_bound(1.0).is_none());
    }

    #[test]
    fn mixed_orders_truncate_to_the_smaller() {
        let a = PowerSeries::new(vec![1.0f64, 2.0, 3.0]);
        let b = PowerSeries::new(vec![1.0f64, 1.0]);
        assert_eq!((a.clone() + b.clone()).order(), 1);
        assert_eq!((a * b).coeffs(), &[1.0, 3.0]);
    }
}
