//! Kneading coordinates, the kneading matrix and its determinant.
//!
//! For a germ `x` and a column `k` the kneading coordinate is
//! `Theta_k(x, t) = sum_n t^n (sg)^(n)(x) sigma_{c_k}(f^n x)`, where column 0
//! compares against the constant `sigma_{a^+} = 1/2`. Row 0 of the matrix
//! applies `Delta_a H = H(a^+) + H(b^-)`, row `j >= 1` applies
//! `Delta_{c_j} H = H(c_j^+) - H(c_j^-)`.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::germ::{germ_orbit_until_cycle, sigma_point_at_germ, Cycle, PointGerm, Sign};
use crate::linalg::Matrix;
use crate::map::MapSpec;
use crate::poly::Poly;
use crate::ratfunc::RationalFunction;
use crate::scalar::{Real, Scalar};
use crate::series::{Envelope, PowerSeries};

/// Default truncation order of series computations.
pub const DEFAULT_ORDER: usize = 128;

/// Orbit steps explored before giving up on an eventual cycle.
pub const DEFAULT_CYCLE_SEARCH: usize = 10_000;

/// Orbit of one germ, reduced to what the kneading coordinates need: the
/// branch visited at each step and the number of interior cut points below
/// each orbit germ.
#[derive(Clone, Debug)]
pub struct OrbitData {
    germ: String,
    itinerary: Vec<usize>,
    ranks: Vec<usize>,
    cycle: Option<Cycle>,
}

impl OrbitData {
    pub fn compute<T: Real>(spec: &MapSpec<T>, u: &PointGerm<T>, steps: usize) -> Result<Self> {
        let orbit = germ_orbit_until_cycle(spec, u, steps)?;
        let interior = &spec.cuts()[1..=spec.d()];
        let ranks = orbit
            .germs
            .iter()
            .map(|g| interior.iter().filter(|&c| sigma_point_at_germ(c, g) == Sign::Plus).count())
            .collect();
        let itinerary = match orbit.cycle {
            // the germ list ends with the repeated germ; its branch is the
            // branch of the cycle entry
            Some(c) => {
                let mut it = orbit.itinerary.clone();
                it.truncate(c.preperiod + c.period);
                it
            }
            None => orbit.itinerary.clone(),
        };
        Ok(Self { germ: u.to_string(), itinerary, ranks, cycle: orbit.cycle })
    }

    pub fn cycle(&self) -> Option<Cycle> {
        self.cycle
    }

    /// Number of orbit positions known without periodic extension.
    pub fn known_len(&self) -> usize {
        self.ranks.len()
    }

    fn index(&self, n: usize) -> Option<usize> {
        match self.cycle {
            Some(Cycle { preperiod: p, period: q }) if n >= p => Some(p + (n - p) % q),
            _ => (n < self.ranks.len()).then_some(n),
        }
    }

    pub fn rank(&self, n: usize) -> Option<usize> {
        self.index(n).map(|i| self.ranks[i])
    }

    pub fn branch(&self, n: usize) -> Option<usize> {
        self.index(n).and_then(|i| self.itinerary.get(i).copied())
    }

    /// Cumulative signed weights `(sg)^(n)` for `n = 0..=order`.
    pub fn signed_weights<W: Scalar>(&self, sg: &[W], order: usize) -> Option<Vec<W>> {
        let mut out = Vec::with_capacity(order + 1);
        out.push(W::one());
        for n in 0..order {
            let k = self.branch(n)?;
            let next = out[n].clone() * sg[k].clone();
            out.push(next);
        }
        Some(out)
    }
}

/// `s_k g_k` per branch for the given weights.
pub fn signed_branch_weights<T: Real, W: Scalar>(spec: &MapSpec<T>, weights: &[W]) -> Vec<W> {
    spec.branches()
        .iter()
        .zip(weights)
        .map(|(b, w)| if b.sign == Sign::Plus { w.clone() } else { -w.clone() })
        .collect()
}

/// `sigma_{c_k}` at a germ with `rank` interior cuts below it, times two.
fn column_sign(k: usize, rank: usize) -> i64 {
    if k == 0 || rank >= k { 1 } else { -1 }
}

/// The germs feeding the Delta functionals, in the order
/// `a^+, b^-, c_1^-, c_1^+, ..., c_d^-, c_d^+`.
pub fn functional_germs<T: Real>(spec: &MapSpec<T>) -> Vec<PointGerm<T>> {
    let mut out = vec![PointGerm::plus(spec.a().clone()), PointGerm::minus(spec.b().clone())];
    for c in &spec.cuts()[1..=spec.d()] {
        out.push(PointGerm::minus(c.clone()));
        out.push(PointGerm::plus(c.clone()));
    }
    out
}

/// `(germ position in functional_germs, coefficient)` pairs for row `j`.
fn row_combination(j: usize) -> [(usize, i64); 2] {
    if j == 0 {
        [(0, 1), (1, 1)]
    } else {
        [(2 * j + 1, 1), (2 * j, -1)]
    }
}

fn theta_coeffs<W: Scalar>(data: &OrbitData, sgw: &[W], k: usize) -> Vec<W> {
    let half = W::half();
    sgw.iter()
        .enumerate()
        .map(|(n, w)| {
            let s = column_sign(k, data.rank(n).expect("orbit covers the order"));
            w.clone() * half.clone() * W::from_i64(s)
        })
        .collect()
}

fn check_column<T: Real>(spec: &MapSpec<T>, k: usize) -> Result<()> {
    if k > spec.d() {
        return Err(Error::OutOfDomain(format!("column {k} exceeds d = {}", spec.d())));
    }
    Ok(())
}

/// Truncated kneading coordinate `Theta_{c_k}(x, t)` through order `order`.
pub fn theta_series<T: Real>(spec: &MapSpec<T>, k: usize, x: &PointGerm<T>, order: usize) -> Result<PowerSeries<T>> {
    check_column(spec, k)?;
    let data = OrbitData::compute(spec, x, order)?;
    let sg = signed_branch_weights(spec, &spec.weights());
    let sgw = data.signed_weights(&sg, order).expect("orbit covers the order");
    let env = Envelope { scale: 0.5, growth: spec.max_weight() };
    Ok(PowerSeries::new(theta_coeffs(&data, &sgw, k)).with_envelope(env))
}

fn closed_from_data<W: Scalar>(data: &OrbitData, sg: &[W], k: usize) -> Result<RationalFunction<W>> {
    let Some(Cycle { preperiod: p, period: q }) = data.cycle else {
        return Err(Error::NoCycle { germ: data.germ.clone(), steps: data.known_len() - 1 });
    };
    let sgw = data.signed_weights(sg, p + q).expect("cycle is covered");
    let c = theta_coeffs(data, &sgw, k);
    let head = Poly::new(c[..p].to_vec());
    let body = Poly::new(c[p..p + q].to_vec());
    let w_cyc = (p..p + q).fold(W::one(), |acc, n| acc * sg[data.branch(n).expect("cycle")].clone());
    let den = Poly::one() - Poly::monomial(w_cyc, q);
    let num = head * den.clone() + Poly::monomial(W::one(), p) * body;
    Ok(RationalFunction::new(num, den))
}

/// Exact kneading coordinate by resummation over the eventual cycle of the
/// germ orbit. Errors with [`Error::NoCycle`] if no repetition shows up
/// within `max_steps` steps.
pub fn theta_closed<T: Real>(spec: &MapSpec<T>, k: usize, x: &PointGerm<T>, max_steps: usize) -> Result<RationalFunction<T>> {
    check_column(spec, k)?;
    let data = OrbitData::compute(spec, x, max_steps)?;
    closed_from_data(&data, &signed_branch_weights(spec, &spec.weights()), k)
}

/// `Delta_a H` for `j = 0`, `Delta_{c_j} H` otherwise, with `H` given by its
/// values on germs.
pub fn delta_apply<T: Real, W: Scalar>(spec: &MapSpec<T>, j: usize, values: &[(PointGerm<T>, W)]) -> Result<W> {
    if j > spec.d() {
        return Err(Error::OutOfDomain(format!("row {j} exceeds d = {}", spec.d())));
    }
    let germs = functional_germs(spec);
    let lookup = |g: &PointGerm<T>| {
        values
            .iter()
            .find(|(h, _)| h == g)
            .map(|(_, w)| w.clone())
            .ok_or_else(|| Error::MissingGerm(g.to_string()))
    };
    let mut acc = W::zero();
    for (idx, coeff) in row_combination(j) {
        acc = acc + lookup(&germs[idx])? * W::from_i64(coeff);
    }
    Ok(acc)
}

/// How entries of the kneading matrix are represented.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixMode {
    /// Truncated power series through the given order.
    Series(usize),
    /// Exact rational functions; every functional germ must be eventually
    /// periodic within the given number of steps.
    Exact(usize),
}

impl MatrixMode {
    pub fn exact() -> Self {
        MatrixMode::Exact(DEFAULT_CYCLE_SEARCH)
    }

    pub fn series() -> Self {
        MatrixMode::Series(DEFAULT_ORDER)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KneadingMatrix<W> {
    Series(Matrix<PowerSeries<W>>),
    Exact(Matrix<RationalFunction<W>>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Determinant<W> {
    Series(PowerSeries<W>),
    Exact(RationalFunction<W>),
}

impl<W: Scalar> Determinant<W> {
    pub fn eval_complex(&self, t: Complex64) -> Complex64 {
        match self {
            Determinant::Series(s) => s.eval_complex(t),
            Determinant::Exact(r) => r.eval_complex(t),
        }
    }

    pub fn as_exact(&self) -> Option<&RationalFunction<W>> {
        match self {
            Determinant::Exact(r) => Some(r),
            Determinant::Series(_) => None,
        }
    }

    pub fn as_series(&self) -> Option<&PowerSeries<W>> {
        match self {
            Determinant::Series(s) => Some(s),
            Determinant::Exact(_) => None,
        }
    }
}

impl<W: Scalar> KneadingMatrix<W> {
    pub fn size(&self) -> usize {
        match self {
            KneadingMatrix::Series(m) => m.rows(),
            KneadingMatrix::Exact(m) => m.rows(),
        }
    }

    pub fn as_exact(&self) -> Option<&Matrix<RationalFunction<W>>> {
        match self {
            KneadingMatrix::Exact(m) => Some(m),
            KneadingMatrix::Series(_) => None,
        }
    }

    pub fn as_series(&self) -> Option<&Matrix<PowerSeries<W>>> {
        match self {
            KneadingMatrix::Series(m) => Some(m),
            KneadingMatrix::Exact(_) => None,
        }
    }
}

/// Orbit data of all functional germs, computed in parallel.
pub fn functional_orbits<T: Real>(spec: &MapSpec<T>, steps: usize) -> Result<Vec<OrbitData>> {
    functional_germs(spec).par_iter().map(|g| OrbitData::compute(spec, g, steps)).collect()
}

pub fn kneading_matrix<T: Real>(spec: &MapSpec<T>, mode: MatrixMode) -> Result<KneadingMatrix<T>> {
    kneading_matrix_with_weights(spec, &spec.weights(), mode)
}

/// Kneading matrix for the germ dynamics of `spec` with branch weights
/// replaced by `weights`, which may be complex.
pub fn kneading_matrix_with_weights<T: Real, W: Scalar>(
    spec: &MapSpec<T>,
    weights: &[W],
    mode: MatrixMode,
) -> Result<KneadingMatrix<W>> {
    assert_eq!(weights.len(), spec.branches().len(), "one weight per branch");
    let sg = signed_branch_weights(spec, weights);
    let d = spec.d();
    match mode {
        MatrixMode::Series(order) => {
            let orbits = functional_orbits(spec, order)?;
            let sgw: Vec<Vec<W>> =
                orbits.iter().map(|o| o.signed_weights(&sg, order).expect("orbit covers the order")).collect();
            let growth = weights.iter().map(Scalar::modulus).fold(0.0, f64::max);
            let m = Matrix::from_fn(d + 1, d + 1, |j, k| {
                let mut acc = vec![W::zero(); order + 1];
                for (idx, coeff) in row_combination(j) {
                    let c = theta_coeffs(&orbits[idx], &sgw[idx], k);
                    for (a, x) in acc.iter_mut().zip(c) {
                        *a = a.clone() + x * W::from_i64(coeff);
                    }
                }
                PowerSeries::new(acc).with_envelope(Envelope { scale: 1.0, growth })
            });
            Ok(KneadingMatrix::Series(m))
        }
        MatrixMode::Exact(steps) => {
            let orbits = functional_orbits(spec, steps)?;
            let thetas: Vec<Vec<RationalFunction<W>>> = orbits
                .par_iter()
                .map(|o| (0..=d).map(|k| closed_from_data(o, &sg, k)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let m = Matrix::from_fn(d + 1, d + 1, |j, k| {
                let [(i0, c0), (i1, c1)] = row_combination(j);
                let scale = |r: &RationalFunction<W>, c: i64| r.clone() * RationalFunction::constant(W::from_i64(c));
                scale(&thetas[i0][k], c0) + scale(&thetas[i1][k], c1)
            });
            Ok(KneadingMatrix::Exact(m))
        }
    }
}

/// Determinant of a rational-function matrix: rows are cleared of
/// denominators, the polynomial determinant is computed by Bareiss
/// elimination and the row multipliers are divided back out.
pub fn rational_determinant<W: Scalar>(m: &Matrix<RationalFunction<W>>) -> RationalFunction<W> {
    let n = m.rows();
    let mut scale = Poly::one();
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let lcm = m.row(i).iter().fold(Poly::one(), |acc: Poly<W>, r| {
            let g = acc.gcd(r.denominator());
            (acc * r.denominator().clone()).exact_div(&g)
        });
        rows.push(m.row(i).iter().map(|r| (r.numerator().clone() * lcm.clone()).exact_div(r.denominator())).collect());
        scale = scale * lcm;
    }
    let det = Matrix::from_rows(rows).determinant();
    RationalFunction::new(det, scale)
}

/// Determinant of a power-series matrix. Exact coefficients are first made
/// integral by scaling rows and substituting `t = D u`, which keeps the
/// rational arithmetic free of large denominators.
pub fn series_determinant<W: Scalar>(m: &Matrix<PowerSeries<W>>) -> PowerSeries<W> {
    let enveloped = (0..m.rows()).any(|i| m.row(i).iter().any(|s| s.envelope().is_some()));
    if !W::EXACT || m.rows() == 0 || enveloped {
        return m.determinant();
    }
    let lcm_of = |it: &mut dyn Iterator<Item = &W>| -> Option<BigInt> {
        let mut acc = BigInt::one();
        for c in it {
            acc = acc.lcm(&c.denominator_hint()?);
        }
        Some(acc)
    };
    let order = (0..m.rows()).flat_map(|i| m.row(i).iter().map(PowerSeries::order)).min().unwrap_or(0);
    let row_scale: Option<Vec<BigInt>> =
        (0..m.rows()).map(|i| lcm_of(&mut m.row(i).iter().map(|s| &s.coeffs()[0]))).collect();
    let d = if order >= 1 { lcm_of(&mut (0..m.rows()).flat_map(|i| m.row(i).iter().map(|s| &s.coeffs()[1]))) } else { Some(BigInt::one()) };
    let (row_scale, d) = match (row_scale, d.and_then(|d| d.to_i64())) {
        (Some(r), Some(d)) if r.iter().all(|x| x.to_i64().is_some()) => (r.iter().map(|x| x.to_i64().unwrap()).collect::<Vec<_>>(), d),
        _ => return m.determinant(),
    };
    let dw = W::from_i64(d);
    let mut pow = vec![W::one()];
    for k in 1..=order {
        pow.push(pow[k - 1].clone() * dw.clone());
    }
    let scaled = Matrix::from_fn(m.rows(), m.cols(), |i, j| {
        let r = W::from_i64(row_scale[i]);
        PowerSeries::new(m.get(i, j).coeffs()[..=order].iter().zip(&pow).map(|(c, p)| c.clone() * p.clone() * r.clone()).collect())
    });
    let det = scaled.determinant();
    let total = row_scale.iter().fold(W::one(), |acc, r| acc * W::from_i64(*r));
    PowerSeries::new(det.coeffs().iter().zip(&pow).map(|(c, p)| c.clone() / (p.clone() * total.clone())).collect())
}

pub fn mt_determinant<W: Scalar>(m: &KneadingMatrix<W>) -> Determinant<W> {
    match m {
        KneadingMatrix::Series(s) => Determinant::Series(series_determinant(s)),
        KneadingMatrix::Exact(r) => Determinant::Exact(rational_determinant(r)),
    }
}

/// Determinant of the lower-right `d x d` block (row and column 0 removed).
pub fn mt_determinant_minor<W: Scalar>(m: &KneadingMatrix<W>) -> Result<Determinant<W>> {
    if m.size() < 2 {
        return Err(Error::OutOfDomain("the minor needs d >= 1".into()));
    }
    Ok(match m {
        KneadingMatrix::Series(s) => Determinant::Series(series_determinant(&s.minor(0))),
        KneadingMatrix::Exact(r) => Determinant::Exact(rational_determinant(&r.minor(0))),
    })
}

/// Value of a determinant together with a bound on its truncation error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeterminantValue {
    pub value: Complex64,
    pub error_bound: f64,
    pub order: usize,
}

/// Fast repeated evaluation of `d_MT(t)` inside `|t| < 1/G`, where `G` is the
/// largest weight modulus. Orbit data is extended on demand; entries are
/// summed with an explicit geometric tail bound.
#[derive(Clone, Debug)]
pub struct DeterminantEvaluator<T> {
    spec: MapSpec<T>,
    size: usize,
    orbits: Vec<OrbitData>,
    orbit_len: usize,
    sg: Vec<Complex64>,
    growth: f64,
    /// Entry coefficients through `coeffs_order`, row-major.
    coeffs: Vec<Vec<Complex64>>,
    coeffs_order: usize,
    max_order: usize,
}

/// Largest truncation order used by default.
pub const MAX_EVAL_ORDER: usize = 1 << 17;

impl<T: Real> DeterminantEvaluator<T> {
    pub fn new(spec: &MapSpec<T>) -> Result<Self> {
        let weights: Vec<Complex64> = spec.weights().iter().map(Scalar::to_complex).collect();
        Self::with_weights(spec, &weights)
    }

    pub fn with_weights(spec: &MapSpec<T>, weights: &[Complex64]) -> Result<Self> {
        Self::with_limits(spec, weights, MAX_EVAL_ORDER)
    }

    pub fn with_limits(spec: &MapSpec<T>, weights: &[Complex64], max_order: usize) -> Result<Self> {
        let sg = signed_branch_weights(spec, weights);
        let growth = weights.iter().map(|w| w.norm()).fold(0.0, f64::max);
        let mut ev = Self {
            spec: spec.clone(),
            size: spec.d() + 1,
            orbits: Vec::new(),
            orbit_len: 0,
            sg,
            growth,
            coeffs: Vec::new(),
            coeffs_order: 0,
            max_order,
        };
        ev.extend_to(DEFAULT_ORDER.min(max_order))?;
        Ok(ev)
    }

    pub fn growth(&self) -> f64 {
        self.growth
    }

    fn extend_to(&mut self, order: usize) -> Result<()> {
        if order <= self.coeffs_order && !self.coeffs.is_empty() {
            return Ok(());
        }
        let periodic = !self.orbits.is_empty() && self.orbits.iter().all(|o| o.cycle.is_some());
        if !periodic && order > self.orbit_len || self.orbits.is_empty() {
            self.orbits = functional_orbits(&self.spec, order)?;
            self.orbit_len = order;
        }
        let sgw: Vec<Vec<Complex64>> =
            self.orbits.iter().map(|o| o.signed_weights(&self.sg, order).expect("orbit covers the order")).collect();
        let n = self.size;
        let mut coeffs = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                let mut acc = vec![Complex64::zero(); order + 1];
                for (idx, coeff) in row_combination(j) {
                    let c = theta_coeffs(&self.orbits[idx], &sgw[idx], k);
                    for (a, x) in acc.iter_mut().zip(c) {
                        *a += x * coeff as f64;
                    }
                }
                coeffs.push(acc);
            }
        }
        self.coeffs = coeffs;
        self.coeffs_order = order;
        Ok(())
    }

    fn matrix_at(&self, t: Complex64, order: usize) -> Matrix<Complex64> {
        let n = self.size;
        Matrix::from_fn(n, n, |j, k| {
            self.coeffs[j * n + k][..=order].iter().rev().fold(Complex64::zero(), |acc, c| acc * t + c)
        })
    }

    /// Truncation order needed so each entry's tail is at most `delta`.
    fn order_for(q: f64, delta: f64) -> usize {
        if q == 0.0 {
            return 0;
        }
        // q^{N+1} / (1 - q) <= delta
        let n = ((delta * (1.0 - q)).ln() / q.ln()).ceil() - 1.0;
        n.max(0.0) as usize
    }

    /// `d_MT(t)` with `|value - d_MT(t)| <= error_bound`. The bound is at
    /// most `tol` unless the maximum order is reached first.
    pub fn eval(&mut self, t: Complex64, tol: f64) -> Result<DeterminantValue> {
        let q = t.norm() * self.growth;
        if q >= 1.0 {
            return Err(Error::Divergent(q));
        }
        let n = self.size as f64;
        let mut delta = tol.max(1e-300);
        loop {
            let order = Self::order_for(q, delta).min(self.max_order);
            if order > self.coeffs_order {
                self.extend_to(order.max(2 * self.coeffs_order).min(self.max_order))?;
            }
            let m = self.matrix_at(t, order);
            let tail = if q == 0.0 { 0.0 } else { q.powi(order as i32 + 1) / (1.0 - q) };
            let bound = hadamard_perturbation(&m, tail * n.sqrt());
            if bound <= tol || order >= self.max_order || delta <= 1e-300 {
                return Ok(DeterminantValue { value: m.det_field(), error_bound: bound, order });
            }
            delta = (delta * (tol / bound).min(0.5)).max(1e-300);
        }
    }

    /// Real part of `d_MT(t)` at a real argument.
    pub fn value(&mut self, t: f64, tol: f64) -> Result<f64> {
        Ok(self.eval(Complex64::new(t, 0.0), tol)?.value.re)
    }
}

/// Bound on `|det(A + E) - det(A)|` when every column of `E` has Euclidean
/// norm at most `col_err`: multilinearity and Hadamard's inequality give
/// `prod (|a_k| + e) - prod |a_k|`.
fn hadamard_perturbation(a: &Matrix<Complex64>, col_err: f64) -> f64 {
    if col_err == 0.0 {
        return 0.0;
    }
    let n = a.rows();
    let mut with = 1.0;
    let mut without = 1.0;
    for k in 0..n {
        let norm = (0..n).map(|i| a.get(i, k).norm_sqr()).sum::<f64>().sqrt();
        with *= norm + col_err;
        without *= norm;
    }
    with - without
}

/// One-shot evaluation of `d_MT(t)`.
pub fn eval_determinant<T: Real>(spec: &MapSpec<T>, t: Complex64, tol: f64) -> Result<DeterminantValue> {
    let q = t.norm() * spec.max_weight();
    if q >= 1.0 {
        return Err(Error::Divergent(q));
    }
    DeterminantEvaluator::new(spec)?.eval(t, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::scalar::{ComplexRational, Rational};

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn qp(c: &[i64]) -> Poly<Rational> {
        Poly::new(c.iter().map(|&n| Rational::from_i64(n)).collect())
    }

    fn rf(num: &[i64], den: &[i64]) -> RationalFunction<Rational> {
        RationalFunction::new(qp(num), qp(den))
    }

    fn half(r: RationalFunction<Rational>) -> RationalFunction<Rational> {
        r * RationalFunction::constant(q(1, 2))
    }

    #[test]
    fn theta_series_of_golden_map() {
        let spec = catalog::golden_map::<Rational>();
        let s = theta_series(&spec, 1, &PointGerm::plus(q(1, 2)), 4).unwrap();
        assert_eq!(s.coeffs(), &[q(1, 2), q(-1, 2), q(-1, 2), q(-1, 2), q(-1, 2)]);
        let s = theta_series(&spec, 0, &PointGerm::plus(q(0, 1)), 5).unwrap();
        assert!(s.coeffs().iter().all(|c| *c == q(1, 2)));
        let s = theta_series(&spec, 1, &PointGerm::minus(q(1, 1)), 0).unwrap();
        assert_eq!(s.coeffs(), &[q(1, 2)]);
    }

    #[test]
    fn closed_thetas_of_golden_map() {
        let spec = catalog::golden_map::<Rational>();
        let c = |k, g| theta_closed(&spec, k, &g, 100).unwrap();
        assert_eq!(c(1, PointGerm::plus(q(1, 2))), half(rf(&[1, -2], &[1, -1])));
        assert_eq!(c(1, PointGerm::minus(q(1, 1))), half(rf(&[1], &[1, 1])));
        assert_eq!(c(1, PointGerm::minus(q(1, 2))), half(rf(&[-1], &[1, 1])));
        assert_eq!(c(1, PointGerm::plus(q(0, 1))), half(rf(&[-1], &[1, -1])));
        assert_eq!(c(0, PointGerm::plus(q(0, 1))), half(rf(&[1], &[1, -1])));
    }

    #[test]
    fn closed_form_matches_series() {
        for spec in [catalog::golden_map::<Rational>(), catalog::tent_map(), catalog::twin_golden_map(), catalog::weighted_golden_map(q(2, 1), q(-1, 3))] {
            for g in functional_germs(&spec) {
                for k in 0..=spec.d() {
                    let closed = theta_closed(&spec, k, &g, 100).unwrap();
                    let series = theta_series(&spec, k, &g, 24).unwrap();
                    assert_eq!(closed.taylor(24).unwrap(), series.coeffs().to_vec(), "germ {g} column {k}");
                }
            }
        }
    }

    #[test]
    fn no_cycle_for_irrational_orbits() {
        let spec = catalog::irrational_rotation_like();
        let c = spec.cuts()[1];
        assert!(matches!(theta_closed(&spec, 1, &PointGerm::minus(c), 50), Err(Error::NoCycle { .. })));
        assert!(theta_series(&spec, 1, &PointGerm::minus(c), 50).is_ok());
    }

    #[test]
    fn delta_functionals() {
        let spec = catalog::twin_golden_map::<Rational>();
        let germs = functional_germs(&spec);
        let cuts = spec.cuts().to_vec();
        for j in 1..=spec.d() {
            for i in 1..=spec.d() {
                let values: Vec<_> = germs
                    .iter()
                    .map(|g| (g.clone(), sigma_point_at_germ(&cuts[i], g).as_scalar::<Rational>() * q(1, 2)))
                    .collect();
                let expect = if i == j { q(1, 1) } else { q(0, 1) };
                assert_eq!(delta_apply(&spec, j, &values).unwrap(), expect);
            }
            let constant: Vec<_> = germs.iter().map(|g| (g.clone(), q(7, 3))).collect();
            assert_eq!(delta_apply(&spec, j, &constant).unwrap(), q(0, 1));
        }
        assert!(matches!(delta_apply::<_, Rational>(&spec, 1, &[]), Err(Error::MissingGerm(_))));
    }

    #[test]
    fn golden_kneading_matrix_and_determinant() {
        let spec = catalog::golden_map::<Rational>();
        let m = kneading_matrix(&spec, MatrixMode::exact()).unwrap();
        let e = m.as_exact().unwrap();
        assert_eq!(e.get(0, 0), &rf(&[1], &[1, -1]));
        assert_eq!(e.get(0, 1), &rf(&[0, -1], &[1, 0, -1]));
        assert!(e.get(1, 0).is_zero_fn());
        assert_eq!(e.get(1, 1), &rf(&[1, -1, -1], &[1, 0, -1]));
        let d = mt_determinant(&m);
        let den = qp(&[1, -1]) * qp(&[1, -1]) * qp(&[1, 1]);
        assert_eq!(d.as_exact().unwrap(), &RationalFunction::new(qp(&[1, -1, -1]), den));
        let minor = mt_determinant_minor(&m).unwrap();
        assert_eq!(minor.as_exact().unwrap(), &rf(&[1, -1, -1], &[1, 0, -1]));
    }

    #[test]
    fn identity_map_matrix() {
        let spec = catalog::identity_map::<Rational>();
        let m = kneading_matrix(&spec, MatrixMode::exact()).unwrap();
        assert_eq!(m.as_exact().unwrap().get(0, 0), &rf(&[1], &[1, -1]));
        assert_eq!(mt_determinant(&m).as_exact().unwrap(), &rf(&[1], &[1, -1]));
        assert!(mt_determinant_minor(&m).is_err());
    }

    #[test]
    fn series_determinant_matches_exact_expansion() {
        for spec in [catalog::golden_map::<Rational>(), catalog::tent_map(), catalog::twin_golden_map()] {
            let exact = mt_determinant(&kneading_matrix(&spec, MatrixMode::exact()).unwrap());
            let series = mt_determinant(&kneading_matrix(&spec, MatrixMode::Series(40)).unwrap());
            assert_eq!(exact.as_exact().unwrap().taylor(40).unwrap(), series.as_series().unwrap().coeffs().to_vec());
        }
        let spec = catalog::golden_map::<Rational>();
        let series = mt_determinant(&kneading_matrix(&spec, MatrixMode::Series(6)).unwrap());
        let expect: Vec<Rational> = [1, 0, 0, -1, -1, -2, -2].iter().map(|&n| Rational::from_i64(n)).collect();
        assert_eq!(series.as_series().unwrap().coeffs(), &expect[..]);
    }

    #[test]
    fn complex_weights_in_exact_arithmetic() {
        let spec = catalog::golden_map::<Rational>();
        let i = ComplexRational::new(q(0, 1), q(1, 1));
        let w = vec![ComplexRational::one(), i];
        let d = mt_determinant(&kneading_matrix_with_weights(&spec, &w, MatrixMode::exact()).unwrap());
        let s = mt_determinant(&kneading_matrix_with_weights(&spec, &w, MatrixMode::Series(12)).unwrap());
        assert_eq!(d.as_exact().unwrap().taylor(12).unwrap(), s.as_series().unwrap().coeffs().to_vec());
    }

    #[test]
    fn storage_order_of_pieces_is_irrelevant() {
        let a = catalog::twin_golden_map::<Rational>();
        let mut pieces: Vec<_> =
            (0..4).map(|k| (a.cuts()[k].clone(), a.cuts()[k + 1].clone(), a.branch(k).clone())).collect();
        pieces.reverse();
        pieces.swap(0, 2);
        let b = MapSpec::from_pieces(q(0, 1), q(2, 1), pieces).unwrap();
        let da = mt_determinant(&kneading_matrix(&a, MatrixMode::exact()).unwrap());
        let db = mt_determinant(&kneading_matrix(&b, MatrixMode::exact()).unwrap());
        assert_eq!(da, db);
    }

    #[test]
    fn numeric_evaluation() {
        let spec = catalog::golden_map::<f64>();
        let v = eval_determinant(&spec, Complex64::new(0.0, 0.0), 1e-12).unwrap();
        assert!((v.value - 1.0).norm() < 1e-14);
        let t = (5f64.sqrt() - 1.0) / 2.0;
        let v = eval_determinant(&spec, Complex64::new(t, 0.0), 1e-12).unwrap();
        assert!(v.value.norm() <= 1e-11);
        assert!(v.error_bound <= 1e-12);
        let v = eval_determinant(&spec, Complex64::new(0.3, 0.0), 1e-12).unwrap();
        let expect = 0.61 / (0.49 * 1.3);
        assert!((v.value.re - expect).abs() < 1e-12);
        assert!(matches!(eval_determinant(&spec, Complex64::new(1.0, 0.0), 1e-12), Err(Error::Divergent(_))));
    }

    #[test]
    fn numeric_evaluation_matches_exact_away_from_axis() {
        let spec = catalog::twin_golden_map::<Rational>();
        let exact = mt_determinant(&kneading_matrix(&spec, MatrixMode::exact()).unwrap());
        let mut ev = DeterminantEvaluator::new(&spec).unwrap();
        for t in [Complex64::new(0.2, 0.5), Complex64::new(-0.7, 0.1), Complex64::new(0.0, -0.9)] {
            let v = ev.eval(t, 1e-10).unwrap();
            assert!((v.value - exact.eval_complex(t)).norm() <= 1e-9, "t = {t}");
        }
    }
}
