//! Peripheral spectrum of the transfer operator: zeros of the kneading
//! determinant, the essential radius, power iteration and the finite dual
//! operator `L^ = S - P S` on a forward-invariant germ carrier.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::germ::{self, germ_closure, germ_step, sigma_point_at_germ, GermIndex, PointGerm};
use crate::kneading::{self, DeterminantEvaluator, MatrixMode};
use crate::linalg::Matrix;
use crate::map::MapSpec;
use crate::poly::Poly;
use crate::ratfunc::RationalFunction;
use crate::scalar::{Rational, Real, Scalar};
use crate::stepfunc::iterate_ones;

/// Edges `k -> j` of the branch transition graph: `f_k(I_k)` meets `I_j`.
pub fn transition_graph<T: Real>(spec: &MapSpec<T>) -> Vec<Vec<usize>> {
    let cuts = spec.cuts();
    (0..spec.branches().len())
        .map(|k| {
            let (lo, hi) = spec.image_bounds(k);
            (0..spec.branches().len()).filter(|&j| lo < cuts[j + 1] && hi > cuts[j]).collect()
        })
        .collect()
}

/// Maximum cycle mean of a node-weighted digraph (Karp). Nodes with weight
/// `-inf` are removed. Returns `None` when the graph has no cycle.
pub fn max_mean_cycle(adj: &[Vec<usize>], weight: &[f64]) -> Option<f64> {
    let n = adj.len();
    if n == 0 {
        return None;
    }
    let ninf = f64::NEG_INFINITY;
    // d[m][v]: best weight of a walk with m edges ending at v, from any start
    let mut d = vec![vec![ninf; n]; n + 1];
    for v in 0..n {
        if weight[v].is_finite() {
            d[0][v] = 0.0;
        }
    }
    for m in 1..=n {
        for u in 0..n {
            if !d[m - 1][u].is_finite() || !weight[u].is_finite() {
                continue;
            }
            for &v in &adj[u] {
                if !weight[v].is_finite() {
                    continue;
                }
                let cand = d[m - 1][u] + weight[u];
                if cand > d[m][v] {
                    d[m][v] = cand;
                }
            }
        }
    }
    let mut best: Option<f64> = None;
    for v in 0..n {
        if !d[n][v].is_finite() {
            continue;
        }
        let worst = (0..n)
            .filter(|&m| d[m][v].is_finite())
            .map(|m| (d[n][v] - d[m][v]) / (n - m) as f64)
            .fold(f64::INFINITY, f64::min);
        if worst.is_finite() {
            best = Some(best.map_or(worst, |b: f64| b.max(worst)));
        }
    }
    best
}

/// Essential spectral radius bound `exp(max cycle mean of log|g_k|)`.
pub fn rho_infty<T: Real>(spec: &MapSpec<T>) -> f64 {
    let adj = transition_graph(spec);
    let w: Vec<f64> = spec.branches().iter().map(|b| b.weight.modulus().ln()).collect();
    max_mean_cycle(&adj, &w).map_or(0.0, f64::exp)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZeroMethod {
    ExactSturm,
    NumericBisection,
    NumericGoldenSection,
}

impl ZeroMethod {
    pub fn name(self) -> &'static str {
        match self {
            ZeroMethod::ExactSturm => "exact-sturm",
            ZeroMethod::NumericBisection => "numeric-bisection",
            ZeroMethod::NumericGoldenSection => "numeric-golden-section",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmallestZero {
    pub t_star: f64,
    /// `-log t*`; reported for unit weights.
    pub h_top: Option<f64>,
    pub rho_sp: f64,
    pub method: ZeroMethod,
}

/// Exact determinant `d_MT(t)` when every functional germ is eventually
/// periodic, `None` otherwise.
pub fn exact_determinant<T: Real>(spec: &MapSpec<T>) -> Result<Option<RationalFunction<T>>> {
    if !T::EXACT {
        return Ok(None);
    }
    match kneading::kneading_matrix(spec, MatrixMode::exact()) {
        Ok(m) => Ok(kneading::mt_determinant(&m).as_exact().cloned()),
        Err(Error::NoCycle { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Upper end `1/rho_infty` of the search interval, `None` when unbounded.
fn zero_radius(rho_inf: f64) -> Option<f64> {
    (rho_inf > 0.0).then(|| 1.0 / rho_inf)
}

/// Cauchy bound on the moduli of polynomial roots.
fn cauchy_bound<F: Scalar>(p: &Poly<F>) -> f64 {
    let n = p.degree().unwrap_or(0);
    let lead = p.leading().modulus();
    1.0 + (0..n).map(|i| p.coeff(i).modulus() / lead).fold(0.0, f64::max)
}

/// Smallest positive zero `t*` of `d_MT` in `(0, 1/rho_infty)`, which for
/// non-negative weights is `1/rho_sp(L)`.
pub fn smallest_zero<T: Real>(spec: &MapSpec<T>, tol: f64) -> Result<SmallestZero> {
    spec.require_nonnegative_weights()?;
    let rho_inf = rho_infty(spec);
    let (t_star, method) = match exact_determinant(spec)? {
        Some(d) => {
            let num = d.numerator();
            let hi = zero_radius(rho_inf).unwrap_or_else(|| cauchy_bound(num));
            let hi = T::from_f64(hi).ok_or(Error::NoPeripheralZero)?;
            let roots = num.real_roots_in(&T::zero(), &hi, tol);
            let t = roots.first().ok_or(Error::NoPeripheralZero)?;
            (t.as_f64(), ZeroMethod::ExactSturm)
        }
        None => numeric_smallest_zero(spec, rho_inf, tol)?,
    };
    let h_top = spec.has_unit_weights().then(|| -t_star.ln());
    Ok(SmallestZero { t_star, h_top, rho_sp: 1.0 / t_star, method })
}

fn numeric_smallest_zero<T: Real>(spec: &MapSpec<T>, rho_inf: f64, tol: f64) -> Result<(f64, ZeroMethod)> {
    let numeric = spec.to_numeric();
    let mut ev = DeterminantEvaluator::new(&numeric)?;
    let g = ev.growth();
    let mut hi = if g > 0.0 { (1.0 - 1e-3) / g } else { 1e3 };
    if let Some(r) = zero_radius(rho_inf) {
        hi = hi.min(r);
    }
    let samples = 1000;
    let scan_tol = 1e-9;
    let mut f = |t: f64| ev.value(t, scan_tol);
    let mut prev_t = 0.0;
    let mut prev = f(0.0)?;
    let mut prev2: Option<(f64, f64)> = None;
    for i in 1..=samples {
        let t = hi * i as f64 / samples as f64;
        let v = f(t)?;
        if v == 0.0 {
            return Ok((t, ZeroMethod::NumericBisection));
        }
        if v.signum() != prev.signum() {
            let (mut lo, mut up, mut flo) = (prev_t, t, prev);
            while up - lo > tol {
                let m = 0.5 * (lo + up);
                let fm = f(m)?;
                if fm == 0.0 {
                    return Ok((m, ZeroMethod::NumericBisection));
                }
                if fm.signum() == flo.signum() {
                    lo = m;
                    flo = fm;
                } else {
                    up = m;
                }
            }
            return Ok((0.5 * (lo + up), ZeroMethod::NumericBisection));
        }
        if let Some((t2, v2)) = prev2 {
            if prev.abs() < v2.abs() && prev.abs() <= v.abs() {
                if let Some(tm) = golden_section_zero(&mut f, t2, t, tol)? {
                    return Ok((tm, ZeroMethod::NumericGoldenSection));
                }
            }
        }
        prev2 = Some((prev_t, prev));
        prev_t = t;
        prev = v;
    }
    Err(Error::NoPeripheralZero)
}

/// Minimizes `|f|` on `[lo, hi]`; returns the minimizer when the minimum
/// is numerically zero.
fn golden_section_zero(f: &mut impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<Option<f64>> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1)?.abs();
    let mut f2 = f(x2)?.abs();
    while hi - lo > tol.max(1e-15) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?.abs();
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?.abs();
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((f(x)?.abs() <= 1e-10).then_some(x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeripheralZero {
    pub t: Complex64,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeripheralZeros {
    pub zeros: Vec<PeripheralZero>,
    /// Zeros are reported inside `|t| < radius`.
    pub radius: f64,
    /// Exact factorization, or numeric clusters whose multiplicities add up
    /// to the winding number on `|t| = radius`.
    pub complete: bool,
    pub method: &'static str,
}

/// Zeros of `d_MT` inside the disk `|t| < 1/rho_infty` with multiplicities.
/// Exact mode factors the numerator; numeric mode works inside
/// `|t| < 0.95/G` with contour winding numbers.
pub fn peripheral_zeros<T: Real>(spec: &MapSpec<T>, tol: f64) -> Result<PeripheralZeros> {
    let rho_inf = rho_infty(spec);
    match exact_determinant(spec)? {
        Some(d) => {
            let radius = zero_radius(rho_inf).unwrap_or(f64::INFINITY);
            Ok(PeripheralZeros { zeros: exact_zeros(d.numerator(), radius, tol), radius, complete: true, method: "exact-factorization" })
        }
        None => numeric_zeros(spec, rho_inf, tol),
    }
}

fn exact_zeros<T: Real>(num: &Poly<T>, radius: f64, tol: f64) -> Vec<PeripheralZero> {
    let mut out = Vec::new();
    for (factor, mult) in num.square_free_decomposition() {
        if factor.degree().unwrap_or(0) == 0 {
            continue;
        }
        let bound = cauchy_bound(&factor);
        let b = T::from_f64(bound).expect("finite bound");
        for r in factor.real_roots_in(&-b.clone(), &b, tol.min(1e-12)) {
            let t = r.as_f64();
            if t.abs() < radius {
                out.push(PeripheralZero { t: Complex64::new(t, 0.0), multiplicity: mult });
            }
        }
        let cf = factor.map(|c| c.to_complex());
        for z in cf.complex_roots() {
            if z.im.abs() > 1e-9 * (1.0 + z.norm()) && z.norm() < radius {
                out.push(PeripheralZero { t: z, multiplicity: mult });
            }
        }
    }
    out.sort_by(|a, b| a.t.norm().partial_cmp(&b.t.norm()).unwrap_or(std::cmp::Ordering::Equal));
    out
}

/// Winding number of `f` around zero along `|t - center| = radius`.
pub fn winding_number(
    f: &mut impl FnMut(Complex64) -> Result<kneading::DeterminantValue>,
    center: Complex64,
    radius: f64,
) -> Result<i64> {
    let point = |s: f64| center + Complex64::from_polar(radius, 2.0 * PI * s);
    let mut total = 0.0;
    let mut stack: Vec<(f64, Complex64, f64, Complex64, u32)> = Vec::new();
    let samples = 64;
    let mut values = Vec::with_capacity(samples + 1);
    for i in 0..=samples {
        let s = i as f64 / samples as f64;
        let v = f(point(s))?;
        if v.value.norm() <= v.error_bound {
            return Err(Error::ContourTooClose(radius));
        }
        values.push((s, v.value));
    }
    for w in values.windows(2) {
        stack.push((w[0].0, w[0].1, w[1].0, w[1].1, 0));
    }
    while let Some((s0, v0, s1, v1, depth)) = stack.pop() {
        let darg = (v1 / v0).arg();
        if darg.abs() < PI / 4.0 || depth > 30 {
            total += darg;
            continue;
        }
        let sm = 0.5 * (s0 + s1);
        let vm = f(point(sm))?;
        if vm.value.norm() <= vm.error_bound {
            return Err(Error::ContourTooClose(radius));
        }
        stack.push((s0, v0, sm, vm.value, depth + 1));
        stack.push((sm, vm.value, s1, v1, depth + 1));
    }
    Ok((total / (2.0 * PI)).round() as i64)
}

fn numeric_zeros<T: Real>(spec: &MapSpec<T>, rho_inf: f64, tol: f64) -> Result<PeripheralZeros> {
    let numeric = spec.to_numeric();
    let mut ev = DeterminantEvaluator::new(&numeric)?;
    let g = ev.growth();
    if g == 0.0 {
        return Ok(PeripheralZeros { zeros: Vec::new(), radius: f64::INFINITY, complete: true, method: "numeric-contour" });
    }
    let mut radius = 0.95 / g;
    if let Some(r) = zero_radius(rho_inf) {
        radius = radius.min(r);
    }
    let eval_tol = 1e-13;
    let total = winding_number(&mut |t| ev.eval(t, eval_tol), Complex64::zero(), radius)?;

    // candidates from the truncated series, polished by Newton steps
    let q = radius * g;
    let order = (((1e-10f64 * (1.0 - q)).ln() / q.ln()).ceil() as usize).clamp(16, 1024);
    let weights: Vec<Complex64> = numeric.weights().iter().map(Scalar::to_complex).collect();
    let series = kneading::mt_determinant(&kneading::kneading_matrix_with_weights(&numeric, &weights, MatrixMode::Series(order))?);
    let poly = Poly::new(series.as_series().expect("series mode").coeffs().to_vec());
    let mut candidates: Vec<Complex64> = Vec::new();
    for z in poly.complex_roots() {
        if z.norm() >= radius {
            continue;
        }
        let mut z = z;
        for _ in 0..20 {
            let h = 1e-7 * (1.0 + z.norm());
            let f0 = ev.eval(z, eval_tol)?.value;
            if f0.norm() < 1e-13 {
                break;
            }
            let fp = ev.eval(z + h, eval_tol)?.value;
            let fm = ev.eval(z - h, eval_tol)?.value;
            let df = (fp - fm) / (2.0 * h);
            if df.norm() == 0.0 {
                break;
            }
            let step = f0 / df;
            z -= step;
            if step.norm() < 1e-15 || z.norm() >= radius {
                break;
            }
        }
        if z.norm() < radius && ev.eval(z, eval_tol)?.value.norm() < 1e-6 {
            candidates.push(z);
        }
    }
    // cluster candidates
    let cluster_radius = (100.0 * tol).max(1e-6);
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for z in candidates {
        match clusters.iter_mut().find(|c| c.iter().any(|w| (w - z).norm() <= cluster_radius)) {
            Some(c) => c.push(z),
            None => clusters.push(vec![z]),
        }
    }
    let centers: Vec<Complex64> = clusters.iter().map(|c| c.iter().sum::<Complex64>() / c.len() as f64).collect();
    let mut zeros = Vec::new();
    for (i, c) in clusters.iter().enumerate() {
        let center = centers[i];
        let spread = c.iter().map(|z| (z - center).norm()).fold(0.0, f64::max);
        // stay clear of the other clusters and of the outer contour
        let cap = centers
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, w)| (w - center).norm() / 2.0)
            .fold(radius - center.norm(), f64::min);
        let mut r = (100.0 * tol).max(4.0 * spread).max(1e-9);
        // a rounded multiple zero is flat; widen the circle until it is resolved
        let m = loop {
            match winding_number(&mut |t| ev.eval(t, eval_tol), center, r) {
                Err(Error::ContourTooClose(_)) if r * 10.0 < cap => r *= 10.0,
                other => break other?,
            }
        };
        if m > 0 {
            let center = if center.im.abs() < 1e-9 { Complex64::new(center.re, 0.0) } else { center };
            zeros.push(PeripheralZero { t: center, multiplicity: m as usize });
        }
    }
    zeros.sort_by(|a, b| a.t.norm().partial_cmp(&b.t.norm()).unwrap_or(std::cmp::Ordering::Equal));
    let found: i64 = zeros.iter().map(|z| z.multiplicity as i64).sum();
    Ok(PeripheralZeros { zeros, radius, complete: found == total, method: "numeric-contour" })
}

/// Estimates `||L^n 1||_sup^{1/n}` for `n = 1..=nmax`.
pub fn power_iteration_rho1<T: Real>(spec: &MapSpec<T>, nmax: usize) -> Result<Vec<f64>> {
    spec.require_nonnegative_weights()?;
    let it = iterate_ones(spec, nmax)?;
    Ok(it.iter().enumerate().skip(1).map(|(n, phi)| phi.sup_norm().as_f64().powf(1.0 / n as f64)).collect())
}

/// The dual operator on a finite forward-invariant germ carrier, acting on
/// germ functions `H` written as value vectors over the carrier.
#[derive(Clone, Debug)]
pub struct DualOperatorMatrices<T> {
    pub carrier: Vec<PointGerm<T>>,
    /// `S H(u) = (sg)(u) H(f u)`
    pub s_hat: Matrix<T>,
    /// `P H(u) = sigma_a(u) Delta_a H + sum_j sigma_{c_j}(u) Delta_{c_j} H`
    pub p_mat: Matrix<T>,
    /// `L^ = S - P S`
    pub l_hat: Matrix<T>,
    d: usize,
}

/// Result of [`DualOperatorMatrices::kernel_and_antisymmetry`].
#[derive(Clone, Debug, PartialEq)]
pub struct DualChecks<T> {
    /// `max_u |L^ 1 (u)|`
    pub kernel: T,
    /// `max_H |L^ H(a^+) + L^ H(b^-)|` over the basis of point masses
    pub antisymmetry: T,
}

fn max_abs<T: Real>(xs: impl Iterator<Item = T>) -> T {
    xs.map(|x| x.abs()).fold(T::zero(), |m, v| if v > m { v } else { m })
}

impl<T: Real> DualOperatorMatrices<T> {
    pub fn new(spec: &MapSpec<T>, nmax: usize) -> Result<Self> {
        let carrier = germ_closure(spec, &[], nmax)?;
        Self::on_carrier(spec, carrier)
    }

    /// Matrices on a given carrier, which must be forward invariant and
    /// contain the boundary and cut germs.
    pub fn on_carrier(spec: &MapSpec<T>, carrier: Vec<PointGerm<T>>) -> Result<Self> {
        let n = carrier.len();
        let mut index = GermIndex::new(spec.tolerances().eps_germ);
        for (i, g) in carrier.iter().enumerate() {
            index.insert(g.clone(), i);
        }
        let pos = |g: &PointGerm<T>| index.find(g).ok_or_else(|| Error::MissingGerm(g.to_string()));
        let mut s_hat = Matrix::<T>::zeros(n, n);
        for (i, u) in carrier.iter().enumerate() {
            let k = germ::branch_of_germ(spec, u)?;
            let br = spec.branch(k);
            let sg = br.sign.as_scalar::<T>() * br.weight.clone();
            let j = pos(&germ_step(spec, u)?)?;
            s_hat.set(i, j, s_hat.get(i, j).clone() + sg);
        }
        let half = T::half();
        let ia = pos(&PointGerm::plus(spec.a().clone()))?;
        let ib = pos(&PointGerm::minus(spec.b().clone()))?;
        let mut cut_pos = Vec::new();
        for c in &spec.cuts()[1..=spec.d()] {
            cut_pos.push((c.clone(), pos(&PointGerm::plus(c.clone()))?, pos(&PointGerm::minus(c.clone()))?));
        }
        let mut p_mat = Matrix::<T>::zeros(n, n);
        for (i, u) in carrier.iter().enumerate() {
            let add = |m: &mut Matrix<T>, j: usize, v: T| m.set(i, j, m.get(i, j).clone() + v);
            add(&mut p_mat, ia, half.clone());
            add(&mut p_mat, ib, half.clone());
            for (c, ip, im) in &cut_pos {
                let s = sigma_point_at_germ(c, u).as_scalar::<T>() * half.clone();
                add(&mut p_mat, *ip, s.clone());
                add(&mut p_mat, *im, -s);
            }
        }
        let l_hat = s_hat.sub_mat(&p_mat.matmul(&s_hat));
        Ok(Self { carrier, s_hat, p_mat, l_hat, d: spec.d() })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    fn index_of(&self, g: &PointGerm<T>) -> Option<usize> {
        self.carrier.iter().position(|h| h == g)
    }

    pub fn kernel_and_antisymmetry(&self) -> DualChecks<T> {
        let n = self.carrier.len();
        let ones = vec![T::one(); n];
        let kernel = max_abs(self.l_hat.mat_vec(&ones).into_iter());
        let ia = self.index_of(&self.carrier[0]).expect("a+ leads the carrier");
        let ib = n - 1;
        let antisymmetry = max_abs((0..n).map(|j| self.l_hat.get(ia, j).clone() + self.l_hat.get(ib, j).clone()));
        DualChecks { kernel, antisymmetry }
    }

    /// `max |P^2 - P|`
    pub fn idempotence_defect(&self) -> T {
        let d = self.p_mat.matmul(&self.p_mat).sub_mat(&self.p_mat);
        max_abs((0..d.rows()).flat_map(|i| d.row(i).to_vec()))
    }

    pub fn p_rank(&self, eps: f64) -> usize {
        self.p_mat.rank(eps)
    }

    /// `|| (1 - t L^) - G(t)(1 - t S) ||_inf` with `G(t) = (1 - P) + P (1 - t S)^{-1}`.
    pub fn factorization_residual(&self, t: &T) -> Result<T> {
        let n = self.carrier.len();
        let id = Matrix::identity(n);
        let one_minus_ts = id.sub_mat(&self.s_hat.scale(t));
        let eps = 1e-12;
        let resolvent = one_minus_ts.inverse(eps).ok_or(Error::SingularResolvent)?;
        let g = id.sub_mat(&self.p_mat).add_mat(&self.p_mat.matmul(&resolvent));
        let lhs = id.sub_mat(&self.l_hat.scale(t));
        let diff = lhs.sub_mat(&g.matmul(&one_minus_ts));
        Ok((0..n).map(|i| diff.row(i).iter().fold(T::zero(), |acc, x| acc + x.abs())).fold(T::zero(), |m, v| if v > m { v } else { m }))
    }

    /// Floating-point eigenvalues of `L^`, sorted by decreasing modulus.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let n = self.carrier.len();
        let data: Vec<f64> = (0..n).flat_map(|i| self.l_hat.row(i).iter().map(Real::as_f64).collect::<Vec<_>>()).collect();
        let m = nalgebra::DMatrix::from_row_slice(n, n, &data);
        let mut ev: Vec<Complex64> = m.complex_eigenvalues().iter().map(|z| Complex64::new(z.re, z.im)).collect();
        ev.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    /// `det(1 - t L^)` and `det(1 - t S)` as polynomials.
    pub fn characteristic_determinants(&self) -> (Poly<T>, Poly<T>) {
        (self.l_hat.one_minus_t().determinant(), self.s_hat.one_minus_t().determinant())
    }
}

impl DualOperatorMatrices<Rational> {
    /// The exact identity `det(1 - t L^) = d_MT(t) det(1 - t S)`, checked
    /// against a given determinant.
    pub fn determinant_identity_holds(&self, d_mt: &RationalFunction<Rational>) -> bool {
        let (l, s) = self.characteristic_determinants();
        RationalFunction::from_poly(l) == d_mt.clone() * RationalFunction::from_poly(s)
    }
}

/// Summary of the spectral data of a map with non-negative weights.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralReport {
    pub t_star: f64,
    pub h_top: Option<f64>,
    pub rho_sp: f64,
    pub rho_infty: f64,
    /// Power-iteration estimates `||L^n 1||^{1/n}`, `n = 1..=nmax`.
    pub rho_1: Vec<f64>,
    pub peripheral_zeros: PeripheralZeros,
    pub method: ZeroMethod,
}

pub fn spectral_report<T: Real>(spec: &MapSpec<T>, tol: f64, nmax: usize) -> Result<SpectralReport> {
    let z = smallest_zero(spec, tol)?;
    Ok(SpectralReport {
        t_star: z.t_star,
        h_top: z.h_top,
        rho_sp: z.rho_sp,
        rho_infty: rho_infty(spec),
        rho_1: power_iteration_rho1(spec, nmax)?,
        peripheral_zeros: peripheral_zeros(spec, tol)?,
        method: z.method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    const GOLDEN: f64 = 1.618_033_988_749_895;

    #[test]
    fn essential_radius() {
        assert_eq!(rho_infty(&catalog::golden_map::<Rational>()), 1.0);
        let w = catalog::weighted_golden_map(q(2, 1), q(1, 1));
        assert!((rho_infty(&w) - 2.0).abs() < 1e-15);
        let w = catalog::weighted_golden_map(q(1, 2), q(8, 1));
        // cycle {0, 1} has mean log 2, beating the loop at branch 0
        assert!((rho_infty(&w) - 2.0).abs() < 1e-12);
        assert!((rho_infty(&catalog::full_branch_map(q(3, 4))) - 0.75).abs() < 1e-15);
        assert_eq!(rho_infty(&catalog::full_branch_map(q(0, 1))), 0.0);
    }

    #[test]
    fn karp_matches_enumeration() {
        let adj = vec![vec![1], vec![2, 0], vec![0]];
        let w = vec![1.0, 3.0, -2.0];
        // cycles: 0-1 mean 2, 0-1-2 mean 2/3
        assert!((max_mean_cycle(&adj, &w).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(max_mean_cycle(&[vec![1], vec![]], &[1.0, 1.0]), None);
    }

    #[test]
    fn smallest_zero_of_examples() {
        let z = smallest_zero(&catalog::golden_map::<Rational>(), 1e-13).unwrap();
        assert!((z.t_star - 1.0 / GOLDEN).abs() < 1e-12);
        assert!((z.h_top.unwrap() - GOLDEN.ln()).abs() < 1e-12);
        assert_eq!(z.method, ZeroMethod::ExactSturm);
        let z = smallest_zero(&catalog::tent_map::<Rational>(), 1e-13).unwrap();
        assert!((z.t_star - 0.5).abs() < 1e-12);
        assert_eq!(smallest_zero(&catalog::identity_map::<Rational>(), 1e-12), Err(Error::NoPeripheralZero));
    }

    #[test]
    fn numeric_smallest_zero() {
        let z = smallest_zero(&catalog::golden_map::<f64>(), 1e-12).unwrap();
        assert!((z.t_star - 1.0 / GOLDEN).abs() < 1e-10);
        assert_eq!(z.method, ZeroMethod::NumericBisection);
        let z = smallest_zero(&catalog::twin_golden_map::<f64>(), 1e-12).unwrap();
        assert!((z.t_star - 1.0 / GOLDEN).abs() < 1e-6);
        assert_eq!(z.method, ZeroMethod::NumericGoldenSection);
        assert_eq!(smallest_zero(&catalog::identity_map::<f64>(), 1e-12), Err(Error::NoPeripheralZero));
        let beta = 1.8;
        let z = smallest_zero(&catalog::beta_map(beta), 1e-12).unwrap();
        assert!((z.t_star - 1.0 / beta).abs() < 1e-9);
    }

    #[test]
    fn negative_weights_are_rejected() {
        let w = catalog::weighted_golden_map(q(1, 1), q(-1, 1));
        assert_eq!(smallest_zero(&w, 1e-12), Err(Error::NegativeWeight(1)));
    }

    #[test]
    fn peripheral_zeros_exact() {
        let z = peripheral_zeros(&catalog::golden_map::<Rational>(), 1e-12).unwrap();
        assert_eq!(z.zeros.len(), 1);
        assert!((z.zeros[0].t.re - 1.0 / GOLDEN).abs() < 1e-12);
        assert_eq!(z.zeros[0].multiplicity, 1);
        let z = peripheral_zeros(&catalog::tent_map::<Rational>(), 1e-12).unwrap();
        assert_eq!(z.zeros.len(), 1);
        assert!((z.zeros[0].t.re - 0.5).abs() < 1e-12);
        let z = peripheral_zeros(&catalog::twin_golden_map::<Rational>(), 1e-12).unwrap();
        assert_eq!(z.zeros.len(), 1);
        assert_eq!(z.zeros[0].multiplicity, 2);
    }

    #[test]
    fn peripheral_zeros_numeric() {
        let z = peripheral_zeros(&catalog::golden_map::<f64>(), 1e-10).unwrap();
        assert!(z.complete);
        assert_eq!(z.zeros.len(), 1);
        assert!((z.zeros[0].t - 1.0 / GOLDEN).norm() < 1e-8);
        assert_eq!(z.zeros[0].multiplicity, 1);
        let z = peripheral_zeros(&catalog::twin_golden_map::<f64>(), 1e-10).unwrap();
        assert!(z.complete);
        assert_eq!(z.zeros.len(), 1);
        assert_eq!(z.zeros[0].multiplicity, 2);
    }

    #[test]
    fn power_iteration() {
        let r = power_iteration_rho1(&catalog::golden_map::<Rational>(), 30).unwrap();
        assert!((r[29] - GOLDEN).abs() < 0.02);
        let r = power_iteration_rho1(&catalog::tent_map::<Rational>(), 10).unwrap();
        assert!(r.iter().all(|x| (x - 2.0).abs() < 1e-12));
        let r = power_iteration_rho1(&catalog::identity_map::<Rational>(), 10).unwrap();
        assert!(r.iter().all(|x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn dual_operator_on_golden_carrier() {
        let spec = catalog::golden_map::<Rational>();
        let dual = DualOperatorMatrices::new(&spec, 100).unwrap();
        let expect = vec![PointGerm::plus(q(0, 1)), PointGerm::minus(q(1, 2)), PointGerm::plus(q(1, 2)), PointGerm::minus(q(1, 1))];
        assert_eq!(dual.carrier, expect);
        let checks = dual.kernel_and_antisymmetry();
        assert!(checks.kernel.is_zero());
        assert!(checks.antisymmetry.is_zero());
        assert!(dual.idempotence_defect().is_zero());
        assert_eq!(dual.p_rank(0.0), 2);
        for t in [q(0, 1), q(1, 7), q(3, 10)] {
            assert!(dual.factorization_residual(&t).unwrap().is_zero());
        }
        let ev = dual.eigenvalues();
        assert!(ev.iter().any(|z| (z - GOLDEN).norm() < 1e-10));
        let d = exact_determinant(&spec).unwrap().unwrap();
        assert!(dual.determinant_identity_holds(&d));
    }

    #[test]
    fn dual_checks_detect_corruption() {
        let spec = catalog::golden_map::<Rational>();
        let mut dual = DualOperatorMatrices::new(&spec, 100).unwrap();
        dual.l_hat.set(0, 1, dual.l_hat.get(0, 1).clone() + q(1, 3));
        let checks = dual.kernel_and_antisymmetry();
        assert!(!checks.kernel.is_zero());
        assert!(!checks.antisymmetry.is_zero());
    }

    #[test]
    fn dual_operator_needs_finite_carrier() {
        let spec = catalog::irrational_rotation_like();
        assert!(matches!(DualOperatorMatrices::new(&spec, 64), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn determinant_identity_on_twin_and_tent() {
        for spec in [catalog::twin_golden_map::<Rational>(), catalog::tent_map(), catalog::weighted_golden_map(q(3, 2), q(1, 5))] {
            let dual = DualOperatorMatrices::new(&spec, 100).unwrap();
            let d = exact_determinant(&spec).unwrap().unwrap();
            assert!(dual.determinant_identity_holds(&d));
            assert!(dual.factorization_residual(&q(1, 7)).unwrap().is_zero());
            assert_eq!(dual.p_rank(0.0), spec.d() + 1);
        }
    }

    #[test]
    fn report_on_golden_map() {
        let r = spectral_report(&catalog::golden_map::<Rational>(), 1e-12, 30).unwrap();
        assert!(r.rho_infty <= r.rho_1[29] + 1e-12);
        assert!(r.rho_1[29] <= r.rho_sp + 0.05);
        assert_eq!(r.peripheral_zeros.zeros.len(), 1);
    }
}
