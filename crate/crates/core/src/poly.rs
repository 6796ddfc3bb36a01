//! Dense univariate polynomials over a [`Scalar`] field.
//!
//! Besides ring arithmetic this module carries the root machinery used for
//! zero extraction: Sturm sequences and bisection for exact real roots, Yun's
//! square-free decomposition for multiplicities, and Aberth iteration for
//! complex roots in floating point.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::scalar::{Real, Scalar};

/// Polynomial with coefficients in ascending order of degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<F> {
    coeffs: Vec<F>,
}

impl<F: Scalar> Poly<F> {
    /// Builds a polynomial, trimming trailing zero coefficients.
    pub fn new(mut coeffs: Vec<F>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn constant(c: F) -> Self {
        Self::new(vec![c])
    }

    /// `c * t^k`
    pub fn monomial(c: F, k: usize) -> Self {
        let mut coeffs = vec![F::zero(); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[F] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<F> {
        self.coeffs
    }

    pub fn coeff(&self, i: usize) -> F {
        self.coeffs.get(i).cloned().unwrap_or_else(F::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> F {
        self.coeffs.last().cloned().unwrap_or_else(F::zero)
    }

    pub fn eval(&self, x: &F) -> F {
        self.coeffs
            .iter()
            .rev()
            .fold(F::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * z + c.to_complex())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c.clone() * F::from_i64(i as i64))
                .collect(),
        )
    }

    pub fn scale(&self, c: &F) -> Self {
        Self::new(self.coeffs.iter().map(|x| x.clone() * c.clone()).collect())
    }

    /// Normalizes the leading coefficient to one (zero stays zero).
    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = F::one() / self.leading();
        self.scale(&inv)
    }

    /// Euclidean division `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        let dd = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        if rem.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![F::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = rem[i + dd].clone() / lead.clone();
            if c.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] = rem[i + j].clone() - c.clone() * dc.clone();
            }
            // force exact cancellation of the eliminated term
            rem[i + dd] = F::zero();
            quot[i] = c;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// Quotient of a division known to be exact.
    pub fn exact_div(&self, divisor: &Self) -> Self {
        let (q, r) = self.div_rem(divisor);
        debug_assert!(!F::EXACT || r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Polynomial with each coefficient mapped through `f`.
    pub fn map<G: Scalar>(&self, f: impl Fn(&F) -> G) -> Poly<G> {
        Poly::new(self.coeffs.iter().map(f).collect())
    }

    /// Coefficients as complex floats.
    pub fn to_complex(&self) -> Poly<Complex64> {
        self.map(|c| c.to_complex())
    }

    /// Square-free decomposition (Yun): pairs `(factor, multiplicity)` with
    /// monic, pairwise coprime, square-free factors whose product with the
    /// multiplicities recovers the monic part of `self`.
    pub fn square_free_decomposition(&self) -> Vec<(Self, usize)> {
        let mut out = Vec::new();
        if self.degree().unwrap_or(0) == 0 {
            return out;
        }
        let f = self.monic();
        let df = f.derivative();
        let a0 = f.gcd(&df);
        let mut b = f.exact_div(&a0);
        let mut c = df.exact_div(&a0);
        let mut d = c - b.derivative();
        let mut multiplicity = 1;
        while b.degree().unwrap_or(0) > 0 {
            let a = b.gcd(&d);
            b = b.exact_div(&a);
            c = d.exact_div(&a);
            d = c - b.derivative();
            if a.degree().unwrap_or(0) > 0 {
                out.push((a, multiplicity));
            }
            multiplicity += 1;
        }
        out
    }
}

impl<F: Real> Poly<F> {
    /// Sturm sequence `p, p', -rem(p, p'), ...`.
    pub fn sturm_sequence(&self) -> Vec<Self> {
        let mut seq = vec![self.clone()];
        let d = self.derivative();
        if d.is_zero() {
            return seq;
        }
        seq.push(d);
        loop {
            let n = seq.len();
            let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(-r);
        }
        seq
    }

    fn sign_variations(seq: &[Self], x: &F) -> usize {
        let mut last: Option<bool> = None;
        let mut count = 0;
        for p in seq {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let positive = v > F::zero();
            if let Some(prev) = last {
                if prev != positive {
                    count += 1;
                }
            }
            last = Some(positive);
        }
        count
    }

    /// Number of distinct real roots in the half-open interval `(lo, hi]`.
    pub fn count_roots(&self, seq: &[Self], lo: &F, hi: &F) -> usize {
        Self::sign_variations(seq, lo).saturating_sub(Self::sign_variations(seq, hi))
    }

    /// Distinct real roots in the open interval `(lo, hi)`, each refined by
    /// Sturm-guided bisection to an enclosing interval of width at most
    /// `tol`, returned as interval midpoints in increasing order.
    pub fn real_roots_in(&self, lo: &F, hi: &F, tol: f64) -> Vec<F> {
        if self.degree().unwrap_or(0) == 0 || lo >= hi {
            return Vec::new();
        }
        let seq = self.sturm_sequence();
        let mut roots = Vec::new();
        let mut stack = vec![(lo.clone(), hi.clone())];
        while let Some((l, h)) = stack.pop() {
            let mut n = self.count_roots(&seq, &l, &h);
            // open at h
            if self.eval(&h).is_zero() {
                n = n.saturating_sub(1);
            }
            if n == 0 {
                continue;
            }
            let width = (h.clone() - l.clone()).as_f64();
            if n == 1 && width <= tol {
                roots.push(l.midpoint(&h));
                continue;
            }
            let m = l.midpoint(&h);
            if !F::EXACT && (m <= l || m >= h) {
                roots.push(m);
                continue;
            }
            if self.eval(&m).is_zero() {
                roots.push(m.clone());
            }
            // process the lower half first
            stack.push((m.clone(), h));
            stack.push((l, m));
        }
        roots.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        roots
    }
}

impl Poly<Complex64> {
    /// All complex roots by Aberth–Ehrlich iteration followed by Newton
    /// polishing. Roots of multiplicity `m` appear `m` times.
    pub fn complex_roots(&self) -> Vec<Complex64> {
        let n = match self.degree() {
            Some(n) if n > 0 => n,
            _ => return Vec::new(),
        };
        let p = self.monic();
        let dp = p.derivative();
        let mut zeros_at_origin = 0;
        while zeros_at_origin < n && p.coeffs[zeros_at_origin].norm() == 0.0 {
            zeros_at_origin += 1;
        }
        // start on a circle of the mean root modulus
        let lead = p.coeffs[n].norm();
        let tail = p.coeffs[zeros_at_origin].norm();
        let mean = if zeros_at_origin < n && tail > 0.0 {
            (tail / lead).powf(1.0 / (n - zeros_at_origin) as f64)
        } else {
            1.0
        };
        let start = if mean.is_finite() && mean > 0.0 { mean } else { 1.0 };
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64;
                Complex64::from_polar(start, angle)
            })
            .collect();
        let mut done = vec![false; n];
        for _ in 0..500 {
            let mut active = false;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let pv = p.eval_complex(z[i]);
                if pv.norm() == 0.0 {
                    done[i] = true;
                    continue;
                }
                let ratio = pv / dp.eval_complex(z[i]);
                let repulsion: Complex64 = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        let diff = z[i] - z[j];
                        if diff.norm() == 0.0 {
                            Complex64::zero()
                        } else {
                            Complex64::one() / diff
                        }
                    })
                    .sum();
                let denom = Complex64::one() - ratio * repulsion;
                let step = if denom.norm() == 0.0 { ratio } else { ratio / denom };
                if step.is_finite() {
                    z[i] -= step;
                    if step.norm() <= 1e-15 * (1.0 + z[i].norm()) {
                        done[i] = true;
                    } else {
                        active = true;
                    }
                }
            }
            if !active {
                break;
            }
        }
        for (k, root) in z.iter_mut().enumerate() {
            if k < zeros_at_origin && root.norm() < 1e-8 {
                *root = Complex64::zero();
            }
        }
        z.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(std::cmp::Ordering::Equal));
        z
    }
}

impl<F: Scalar> Zero for Poly<F> {
    fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl<F: Scalar> One for Poly<F> {
    fn one() -> Self {
        Self::constant(F::one())
    }
}

impl<F: Scalar> Add for Poly<F> {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl<F: Scalar> Sub for Poly<F> {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl<F: Scalar> Neg for Poly<F> {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

impl<F: Scalar> Mul for Poly<F> {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut out = vec![F::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].clone() + a.clone() * b.clone();
            }
        }
        Self::new(out)
    }
}

impl<F: Scalar + fmt::Display> fmt::Display for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})t"),
                _ => format!("({c})t^{i}"),
            })
            .collect();
        f.write_str(&terms.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn qp(c: &[(i64, i64)]) -> Poly<Rational> {
        Poly::new(c.iter().map(|&(n, d)| q(n, d)).collect())
    }

    #[test]
    fn division_and_gcd() {
        // (t - 1)(t + 2) / (t - 1)
        let a = qp(&[(-2, 1), (1, 1), (1, 1)]);
        let b = qp(&[(-1, 1), (1, 1)]);
        let (quot, rem) = a.div_rem(&b);
        assert_eq!(quot, qp(&[(2, 1), (1, 1)]));
        assert!(rem.is_zero());
        let c = qp(&[(1, 1), (-2, 1), (1, 1)]); // (t-1)^2
        assert_eq!(a.gcd(&c), b);
    }

    #[test]
    fn sturm_isolates_golden_root() {
        // 1 - t - t^2 has roots (-1 +- sqrt 5)/2
        let p = qp(&[(1, 1), (-1, 1), (-1, 1)]);
        let roots = p.real_roots_in(&q(0, 1), &q(1, 1), 1e-14);
        assert_eq!(roots.len(), 1);
        let expected = (5f64.sqrt() - 1.0) / 2.0;
        assert!((roots[0].as_f64() - expected).abs() < 1e-13);
        let all = p.real_roots_in(&q(-3, 1), &q(3, 1), 1e-12);
        assert_eq!(all.len(), 2);
    }

    #[test]
    fn root_at_open_endpoint_is_excluded() {
        let p = qp(&[(-1, 1), (1, 1)]); // t - 1
        assert!(p.real_roots_in(&q(0, 1), &q(1, 1), 1e-10).is_empty());
        assert_eq!(p.real_roots_in(&q(0, 1), &q(2, 1), 1e-10).len(), 1);
    }

    #[test]
    fn yun_detects_double_factor() {
        // (1 - t - t^2)^2 (1 - t)
        let g = qp(&[(1, 1), (-1, 1), (-1, 1)]);
        let p = g.clone() * g.clone() * qp(&[(1, 1), (-1, 1)]);
        let dec = p.square_free_decomposition();
        assert_eq!(dec.len(), 2);
        assert_eq!(dec[0], (qp(&[(-1, 1), (1, 1)]), 1));
        assert_eq!(dec[1], (g.monic(), 2));
    }

    #[test]
    fn aberth_finds_all_roots() {
        let p = qp(&[(1, 1), (-1, 1), (-1, 1)]).to_complex();
        let roots = p.complex_roots();
        assert_eq!(roots.len(), 2);
        assert!((roots[0].re - 0.6180339887498949).abs() < 1e-12);
        assert!((roots[1].re + 1.618033988749895).abs() < 1e-12);
        let cubic = qp(&[(1, 1), (0, 1), (0, 1), (1, 1)]).to_complex(); // 1 + t^3
        for r in cubic.complex_roots() {
            assert!(cubic.eval_complex(r).norm() < 1e-12);
        }
    }
}
