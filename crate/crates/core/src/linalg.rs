//! Small dense matrices and determinants over rings and fields.
//!
//! Determinants over polynomial and power-series rings use Bareiss'
//! fraction-free elimination, whose intermediate divisions are exact; field
//! matrices use Gaussian elimination with partial pivoting.

use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::scalar::Scalar;
use crate::series::PowerSeries;

/// Commutative ring with exact division by admissible pivots.
pub trait Ring: Clone + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_ring_zero(&self) -> bool;
    /// Whether the element may serve as an elimination pivot.
    fn is_pivot(&self) -> bool;
    /// `self / divisor` for a division known to be exact.
    fn exact_div(&self, divisor: &Self) -> Self;
    /// Multiplicative inverse, for rings where pivots are units.
    fn unit_inverse(&self) -> Option<Self> {
        None
    }
}

impl<F: Scalar> Ring for Poly<F> {
    fn zero_like(&self) -> Self {
        Poly::zero()
    }

    fn one_like(&self) -> Self {
        Poly::one()
    }

    fn is_ring_zero(&self) -> bool {
        self.is_zero()
    }

    fn is_pivot(&self) -> bool {
        !self.is_zero()
    }

    fn exact_div(&self, divisor: &Self) -> Self {
        Poly::exact_div(self, divisor)
    }
}

impl<F: Scalar> Ring for PowerSeries<F> {
    fn zero_like(&self) -> Self {
        PowerSeries::zero_of_order(self.order())
    }

    fn one_like(&self) -> Self {
        PowerSeries::one_of_order(self.order())
    }

    fn is_ring_zero(&self) -> bool {
        self.is_zero_series()
    }

    fn is_pivot(&self) -> bool {
        self.is_unit()
    }

    fn exact_div(&self, divisor: &Self) -> Self {
        let inv = divisor.inverse().expect("pivot must be a unit");
        self.clone() * inv
    }

    fn unit_inverse(&self) -> Option<Self> {
        self.inverse()
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Clone> Matrix<R> {
    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == m), "ragged matrix");
        Self { rows: n, cols: m, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &R {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: R) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<R>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<S: Clone>(&self, f: impl Fn(&R) -> S) -> Matrix<S> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Submatrix with row and column `skip` removed.
    pub fn minor(&self, skip: usize) -> Self {
        Self::from_fn(self.rows - 1, self.cols - 1, |i, j| {
            let ii = if i >= skip { i + 1 } else { i };
            let jj = if j >= skip { j + 1 } else { j };
            self.get(ii, jj).clone()
        })
    }
}

impl<R: Ring> Matrix<R> {
    /// Determinant by fraction-free Bareiss elimination, falling back to
    /// cofactor expansion when no admissible pivot exists in a column.
    pub fn determinant(&self) -> R {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        assert!(n > 0, "determinant of an empty matrix");
        if let Some(d) = unit_elimination(self.to_rows()) {
            return d;
        }
        match bareiss(self.to_rows()) {
            Some(d) => d,
            None => cofactor(&self.to_rows()),
        }
    }
}

/// Gaussian elimination when every pivot is a unit: one inverse per pivot.
fn unit_elimination<R: Ring>(mut a: Vec<Vec<R>>) -> Option<R> {
    let n = a.len();
    let mut det = a[0][0].one_like();
    for k in 0..n {
        let p = match (k..n).find(|&i| a[i][k].is_pivot()) {
            Some(p) => p,
            None if (k..n).all(|i| a[i][k].is_ring_zero()) => return Some(a[0][0].zero_like()),
            None => return None,
        };
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        let inv = a[k][k].unit_inverse()?;
        det = det * a[k][k].clone();
        for i in k + 1..n {
            if a[i][k].is_ring_zero() {
                continue;
            }
            let f = a[i][k].clone() * inv.clone();
            for j in k + 1..n {
                a[i][j] = a[i][j].clone() - f.clone() * a[k][j].clone();
            }
        }
    }
    Some(det)
}

fn bareiss<R: Ring>(mut a: Vec<Vec<R>>) -> Option<R> {
    let n = a.len();
    let mut negate = false;
    let mut prev = a[0][0].one_like();
    for k in 0..n - 1 {
        let pivot = (k..n).find(|&i| a[i][k].is_pivot());
        match pivot {
            Some(p) if p != k => {
                a.swap(p, k);
                negate = !negate;
            }
            Some(_) => {}
            None => {
                if (k..n).all(|i| a[i][k].is_ring_zero()) {
                    return Some(a[0][0].zero_like());
                }
                return None;
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                a[i][j] = v.exact_div(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Some(if negate { -d } else { d })
}

fn cofactor<R: Ring>(a: &[Vec<R>]) -> R {
    let n = a.len();
    if n == 1 {
        return a[0][0].clone();
    }
    let mut acc = a[0][0].zero_like();
    for j in 0..n {
        if a[0][j].is_ring_zero() {
            continue;
        }
        let sub: Vec<Vec<R>> = a[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
            .collect();
        let term = a[0][j].clone() * cofactor(&sub);
        acc = if j % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

impl<F: Scalar> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| F::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { F::one() } else { F::zero() })
    }

    pub fn scale(&self, c: &F) -> Self {
        self.map(|x| x.clone() * c.clone())
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(F::zero(), |acc, k| acc + self.get(i, k).clone() * rhs.get(k, j).clone())
        })
    }

    pub fn mat_vec(&self, v: &[F]) -> Vec<F> {
        (0..self.rows)
            .map(|i| (0..self.cols).fold(F::zero(), |acc, k| acc + self.get(i, k).clone() * v[k].clone()))
            .collect()
    }

    pub fn add_mat(&self, rhs: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).clone() + rhs.get(i, j).clone())
    }

    pub fn sub_mat(&self, rhs: &Self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j).clone() - rhs.get(i, j).clone())
    }

    /// Largest entry modulus.
    pub fn max_modulus(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    /// Row-sum (infinity) norm.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.modulus()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det_field(&self) -> F {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.to_rows();
        let mut det = F::one();
        for k in 0..n {
            let p = (k..n)
                .filter(|&i| !a[i][k].is_zero())
                .max_by(|&x, &y| a[x][k].modulus().partial_cmp(&a[y][k].modulus()).unwrap());
            let Some(p) = p else { return F::zero() };
            if p != k {
                a.swap(p, k);
                det = -det;
            }
            let piv = a[k][k].clone();
            det = det * piv.clone();
            for i in k + 1..n {
                let f = a[i][k].clone() / piv.clone();
                if f.is_zero() {
                    continue;
                }
                for j in k..n {
                    a[i][j] = a[i][j].clone() - f.clone() * a[k][j].clone();
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination. Pivots below `eps` (relative to
    /// the matrix scale, numeric mode only) count as singular.
    pub fn inverse(&self, eps: f64) -> Option<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let scale = self.max_modulus().max(1.0);
        let mut a = self.to_rows();
        let mut inv = Self::identity(n).to_rows();
        for k in 0..n {
            let p = (k..n)
                .filter(|&i| !a[i][k].is_negligible(eps * scale))
                .max_by(|&x, &y| a[x][k].modulus().partial_cmp(&a[y][k].modulus()).unwrap())?;
            a.swap(p, k);
            inv.swap(p, k);
            let piv = F::one() / a[k][k].clone();
            for j in 0..n {
                a[k][j] = a[k][j].clone() * piv.clone();
                inv[k][j] = inv[k][j].clone() * piv.clone();
            }
            for i in 0..n {
                if i == k || a[i][k].is_zero() {
                    continue;
                }
                let f = a[i][k].clone();
                for j in 0..n {
                    a[i][j] = a[i][j].clone() - f.clone() * a[k][j].clone();
                    inv[i][j] = inv[i][j].clone() - f.clone() * inv[k][j].clone();
                }
            }
        }
        Some(Self::from_rows(inv))
    }

    /// Rank by row reduction; entries below `eps` count as zero in numeric mode.
    pub fn rank(&self, eps: f64) -> usize {
        let mut a = self.to_rows();
        let (n, m) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..m {
            let p = (rank..n)
                .filter(|&i| !a[i][col].is_negligible(eps))
                .max_by(|&x, &y| a[x][col].modulus().partial_cmp(&a[y][col].modulus()).unwrap());
            let Some(p) = p else { continue };
            a.swap(p, rank);
            let piv = a[rank][col].clone();
            for i in rank + 1..n {
                let f = a[i][col].clone() / piv.clone();
                for j in col..m {
                    a[i][j] = a[i][j].clone() - f.clone() * a[rank][j].clone();
                }
            }
            rank += 1;
            if rank == n {
                break;
            }
        }
        rank
    }

    /// `1 - t * self` as a polynomial matrix in `t`.
    pub fn one_minus_t(&self) -> Matrix<Poly<F>> {
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            let c0 = if i == j { F::one() } else { F::zero() };
            Poly::new(vec![c0, -self.get(i, j).clone()])
        })
    }
}
