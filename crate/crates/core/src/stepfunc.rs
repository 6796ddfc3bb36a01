//! Step functions of bounded variation and the transfer operator `L`.
//!
//! A step function is stored in base form `w0 * (1/2) 1 + sum_i w_i sigma_{u_i}`
//! with jump germs `a^+ < u_i < b^-`. The base function `sigma_u` equals
//! `+1/2` above `u` and `-1/2` below it, so `sigma_{a^+} = 1/2` and
//! `sigma_{b^-} = -1/2` are absorbed into `w0`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::germ::{self, germ_compare, germ_step, sigma_point_at_germ, Locus, PointGerm, Sign};
use crate::map::{MapSpec, Tolerances};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<T> {
    a: T,
    b: T,
    w0: T,
    terms: Vec<(PointGerm<T>, T)>,
    tol: Tolerances,
}

/// `(variation, boundary, norm)`
#[derive(Clone, Debug, PartialEq)]
pub struct BvNorm<T> {
    pub variation: T,
    pub boundary: T,
    pub norm: T,
}

impl<T: Real> StepFunction<T> {
    /// Canonical form of `w0 (1/2) 1 + sum w_i sigma_{u_i}`: terms are sorted,
    /// equal germs merged, negligible weights dropped and boundary germs
    /// folded into `w0`.
    pub fn new(a: T, b: T, w0: T, terms: Vec<(PointGerm<T>, T)>) -> Self {
        Self::with_tolerances(a, b, w0, terms, Tolerances::default())
    }

    pub fn with_tolerances(a: T, b: T, w0: T, terms: Vec<(PointGerm<T>, T)>, tol: Tolerances) -> Self {
        let mut f = Self { a, b, w0, terms, tol };
        f.canonicalize();
        f
    }

    pub fn zero(a: T, b: T) -> Self {
        Self::new(a, b, T::zero(), Vec::new())
    }

    /// The constant function `c`.
    pub fn constant(a: T, b: T, c: T) -> Self {
        Self::new(a, b, c.clone() + c, Vec::new())
    }

    pub fn sigma(a: T, b: T, u: PointGerm<T>) -> Self {
        Self::new(a, b, T::zero(), vec![(u, T::one())])
    }

    pub fn zero_for(spec: &MapSpec<T>) -> Self {
        Self::zero(spec.a().clone(), spec.b().clone()).retol(*spec.tolerances())
    }

    pub fn ones_for(spec: &MapSpec<T>) -> Self {
        Self::constant(spec.a().clone(), spec.b().clone(), T::one()).retol(*spec.tolerances())
    }

    fn retol(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self.canonicalize();
        self
    }

    fn canonicalize(&mut self) {
        let mut terms = std::mem::take(&mut self.terms);
        for (g, w) in terms.iter_mut() {
            if g.base == self.a && g.dir == Sign::Plus {
                self.w0 = self.w0.clone() + w.clone();
                *w = T::zero();
            } else if g.base == self.b && g.dir == Sign::Minus {
                self.w0 = self.w0.clone() - w.clone();
                *w = T::zero();
            }
        }
        terms.sort_by(|x, y| germ_compare(&x.0, &y.0));
        let eps_germ = self.tol.eps_germ;
        let mut merged: Vec<(PointGerm<T>, T)> = Vec::with_capacity(terms.len());
        for (g, w) in terms {
            if let Some((last, lw)) = merged.last_mut() {
                if last.dir == g.dir && last.base.near(&g.base, eps_germ) {
                    *lw = lw.clone() + w;
                    continue;
                }
            }
            merged.push((g, w));
        }
        let eps_w = self.tol.eps_weight;
        merged.retain(|(_, w)| !w.is_negligible(eps_w));
        if self.w0.is_negligible(eps_w) {
            self.w0 = T::zero();
        }
        self.terms = merged;
    }

    pub fn a(&self) -> &T {
        &self.a
    }

    pub fn b(&self) -> &T {
        &self.b
    }

    /// Coefficient of `(1/2) 1`, equal to the boundary value `phi(a^+) + phi(b^-)`.
    pub fn w0(&self) -> &T {
        &self.w0
    }

    pub fn terms(&self) -> &[(PointGerm<T>, T)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.w0.is_zero() && self.terms.is_empty()
    }

    /// Builds the step function equal to `values[i]` on the germ-delimited
    /// segment `<u_i, v_i> = { x : u_i < x < v_i }`. Segments may be given
    /// in any order but must tile `(a, b)` exactly.
    pub fn from_piecewise(a: T, b: T, mut segments: Vec<(PointGerm<T>, PointGerm<T>, T)>) -> Result<Self> {
        segments.retain(|(u, v, _)| germ_compare(u, v) != Ordering::Equal);
        if segments.is_empty() {
            return Err(Error::GapInPartition("no segments".into()));
        }
        for (u, v, _) in &segments {
            if germ_compare(u, v) == Ordering::Greater {
                return Err(Error::OverlappingSegments(format!("segment <{u}, {v}> is reversed")));
            }
        }
        segments.sort_by(|x, y| germ_compare(&x.0, &y.0));
        let start = PointGerm::plus(a.clone());
        let end = PointGerm::minus(b.clone());
        if segments[0].0 != start {
            return Err(Error::GapInPartition(format!("first segment starts at {}, expected {start}", segments[0].0)));
        }
        let mut terms = Vec::new();
        for w in segments.windows(2) {
            let (prev, next) = (&w[0], &w[1]);
            match germ_compare(&next.0, &prev.1) {
                Ordering::Less => {
                    return Err(Error::OverlappingSegments(format!(
                        "<{}, {}> overlaps <{}, {}>",
                        prev.0, prev.1, next.0, next.1
                    )))
                }
                Ordering::Greater => {
                    return Err(Error::GapInPartition(format!("nothing covers <{}, {}>", prev.1, next.0)))
                }
                Ordering::Equal => {}
            }
            terms.push((prev.1.clone(), next.2.clone() - prev.2.clone()));
        }
        let last = segments.last().expect("non-empty");
        if last.1 != end {
            return Err(Error::GapInPartition(format!("last segment ends at {}, expected {end}", last.1)));
        }
        let w0 = segments[0].2.clone() + last.2.clone();
        Ok(Self::new(a, b, w0, terms))
    }

    pub fn bv_norm(&self) -> BvNorm<T> {
        let variation = self.terms.iter().fold(T::zero(), |acc, (_, w)| acc + w.abs());
        BvNorm { norm: variation.clone() + self.w0.abs(), variation, boundary: self.w0.clone() }
    }

    /// Pointwise value. At a germ that is itself a jump germ the one-sided
    /// limit is used, `sigma_{u^e}(u^e) = e/2`.
    pub fn eval_step(&self, x: &Locus<T>) -> T {
        let half = T::half();
        let mut acc = self.w0.clone() * half.clone();
        for (g, w) in &self.terms {
            let s = match germ::sigma_sign(&Locus::Germ(g.clone()), x) {
                Ok(s) => s,
                Err(_) => g.dir,
            };
            acc = acc + w.clone() * s.as_scalar::<T>() * half.clone();
        }
        acc
    }

    pub fn eval_point(&self, x: &T) -> T {
        self.eval_step(&Locus::Point(x.clone()))
    }

    /// One point from each maximal constancy piece, in increasing order.
    pub fn piece_representatives(&self) -> Vec<T> {
        let mut bounds: Vec<PointGerm<T>> = vec![PointGerm::plus(self.a.clone())];
        bounds.extend(self.terms.iter().map(|(g, _)| g.clone()));
        bounds.push(PointGerm::minus(self.b.clone()));
        let mut out = Vec::with_capacity(bounds.len());
        for w in bounds.windows(2) {
            let (lo, hi) = (&w[0], &w[1]);
            if lo.dir == Sign::Minus {
                out.push(lo.base.clone());
            } else if lo.base < hi.base {
                out.push(lo.base.midpoint(&hi.base));
            }
        }
        out
    }

    pub fn sup_norm(&self) -> T {
        self.piece_representatives()
            .iter()
            .map(|x| self.eval_point(x).abs())
            .fold(T::zero(), |m, v| if v > m { v } else { m })
    }

    pub fn scale(&self, c: &T) -> Self {
        let terms = self.terms.iter().map(|(g, w)| (g.clone(), w.clone() * c.clone())).collect();
        Self::with_tolerances(self.a.clone(), self.b.clone(), self.w0.clone() * c.clone(), terms, self.tol)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Self::with_tolerances(self.a.clone(), self.b.clone(), self.w0.clone() + other.w0.clone(), terms, self.tol)
    }
}

/// `L_k phi (y) = g_k phi(f_k^{-1} y) chi_{f_k I_k}(y)` in base form.
pub fn apply_branch_operator<T: Real>(spec: &MapSpec<T>, k: usize, phi: &StepFunction<T>) -> Result<StepFunction<T>> {
    let mut terms = Vec::new();
    branch_contribution(spec, k, phi, &mut terms)?;
    Ok(StepFunction::with_tolerances(spec.a().clone(), spec.b().clone(), T::zero(), terms, *spec.tolerances()))
}

/// The transfer operator `L = sum_k L_k`.
pub fn apply_l<T: Real>(spec: &MapSpec<T>, phi: &StepFunction<T>) -> Result<StepFunction<T>> {
    let mut terms = Vec::new();
    for k in 0..spec.branches().len() {
        branch_contribution(spec, k, phi, &mut terms)?;
    }
    Ok(StepFunction::with_tolerances(spec.a().clone(), spec.b().clone(), T::zero(), terms, *spec.tolerances()))
}

fn branch_contribution<T: Real>(
    spec: &MapSpec<T>,
    k: usize,
    phi: &StepFunction<T>,
    terms: &mut Vec<(PointGerm<T>, T)>,
) -> Result<()> {
    let br = spec.branch(k);
    let g = br.weight.clone();
    if g.is_zero() {
        return Ok(());
    }
    let (lo, hi) = (&spec.cuts()[k], &spec.cuts()[k + 1]);
    let left = germ_step(spec, &PointGerm::plus(lo.clone()))?;
    let right = germ_step(spec, &PointGerm::minus(hi.clone()))?;
    let half = T::half();

    // constant part: L_k 1 = g_k chi_{f_k I_k} = g_k (sigma_{p^+} - sigma_{q^-})
    if !phi.w0().is_zero() {
        let c = phi.w0().clone() * half.clone() * g.clone();
        let (p, q) = if br.sign == Sign::Plus { (left.clone(), right.clone()) } else { (right.clone(), left.clone()) };
        terms.push((p, c.clone()));
        terms.push((q, -c));
    }

    let sg = br.sign.as_scalar::<T>() * g;
    for (u, w) in phi.terms() {
        let coeff = sg.clone() * w.clone();
        let inside = germ_compare(u, &PointGerm::plus(lo.clone())) != Ordering::Less
            && germ_compare(u, &PointGerm::minus(hi.clone())) != Ordering::Greater;
        if inside {
            terms.push((germ_step(spec, u)?, coeff.clone()));
        }
        let sa = sigma_point_at_germ(lo, u).as_scalar::<T>() * half.clone();
        let sb = sigma_point_at_germ(hi, u).as_scalar::<T>() * half.clone();
        terms.push((left.clone(), -(coeff.clone() * sa)));
        terms.push((right.clone(), coeff * sb));
    }
    // terms at a^+ and b^- are folded into w0 by canonicalization
    Ok(())
}

/// `L^n 1 (y)` by summing weights over all `n`-fold preimages of `y`.
/// Coinciding preimages are merged level by level.
pub fn transfer_ones<T: Real>(spec: &MapSpec<T>, n: usize, y: &T) -> Result<T> {
    if *y <= *spec.a() || *y >= *spec.b() {
        return Err(Error::OutOfDomain(format!("{y} not in the open interval")));
    }
    let eps = spec.tolerances().eps_germ;
    let mut level: Vec<(T, T)> = vec![(y.clone(), T::one())];
    for _ in 0..n {
        let mut next: Vec<(T, T)> = Vec::new();
        for (x, w) in &level {
            for (k, br) in spec.branches().iter().enumerate() {
                if br.weight.is_zero() {
                    continue;
                }
                if let Some(pre) = spec.inverse_branch(k, x) {
                    if !T::EXACT && spec.cuts().iter().any(|c| pre.near(c, eps)) {
                        return Err(Error::NumericAmbiguity(format!("preimage {pre} of {x} is within {eps:e} of a cut point")));
                    }
                    next.push((pre, w.clone() * br.weight.clone()));
                }
            }
        }
        next.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap_or(Ordering::Equal));
        let mut merged: Vec<(T, T)> = Vec::with_capacity(next.len());
        for (x, w) in next {
            match merged.last_mut() {
                Some((lx, lw)) if lx.near(&x, eps) => *lw = lw.clone() + w,
                _ => merged.push((x, w)),
            }
        }
        level = merged;
    }
    Ok(level.into_iter().fold(T::zero(), |acc, (_, w)| acc + w))
}

/// `L^n 1` as a step function, for `n = 0..=nmax`.
pub fn iterate_ones<T: Real>(spec: &MapSpec<T>, nmax: usize) -> Result<Vec<StepFunction<T>>> {
    let mut out = vec![StepFunction::ones_for(spec)];
    for n in 0..nmax {
        let next = apply_l(spec, &out[n])?;
        out.push(next);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::scalar::{Rational, Scalar};
    use num_traits::{One, Signed, Zero};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn unit() -> (Rational, Rational) {
        (q(0, 1), q(1, 1))
    }

    #[test]
    fn indicator_decomposition() {
        let (a, b) = unit();
        let (u, v) = (q(1, 4), q(3, 4));
        let segs = vec![
            (PointGerm::plus(a.clone()), PointGerm::minus(u.clone()), q(0, 1)),
            (PointGerm::minus(u.clone()), PointGerm::minus(v.clone()), q(1, 1)),
            (PointGerm::minus(v.clone()), PointGerm::minus(b.clone()), q(0, 1)),
        ];
        let phi = StepFunction::from_piecewise(a, b, segs).unwrap();
        assert!(phi.w0().is_zero());
        assert_eq!(phi.terms(), &[(PointGerm::minus(u.clone()), q(1, 1)), (PointGerm::minus(v.clone()), q(-1, 1))]);
        assert_eq!(phi.eval_point(&u), q(1, 1));
        assert_eq!(phi.eval_point(&v), q(0, 1));
        assert_eq!(phi.eval_point(&q(1, 2)), q(1, 1));
        let n = phi.bv_norm();
        assert_eq!((n.variation, n.boundary, n.norm), (q(2, 1), q(0, 1), q(2, 1)));
    }

    #[test]
    fn constant_and_sigma_norms() {
        let (a, b) = unit();
        let one = StepFunction::from_piecewise(
            a.clone(),
            b.clone(),
            vec![(PointGerm::plus(a.clone()), PointGerm::minus(b.clone()), q(1, 1))],
        )
        .unwrap();
        assert_eq!(one.w0(), &q(2, 1));
        assert!(one.terms().is_empty());
        let n = one.bv_norm();
        assert_eq!((n.variation, n.boundary, n.norm), (q(0, 1), q(2, 1), q(2, 1)));

        let s = StepFunction::sigma(a.clone(), b.clone(), PointGerm::plus(q(1, 3)));
        assert_eq!(s.terms(), &[(PointGerm::plus(q(1, 3)), q(1, 1))]);
        let n = s.bv_norm();
        assert_eq!((n.variation, n.boundary, n.norm), (q(1, 1), q(0, 1), q(1, 1)));
        let folded = StepFunction::sigma(a, b, PointGerm::minus(q(1, 1)));
        assert_eq!(folded.w0(), &q(-1, 1));
    }

    #[test]
    fn piecewise_partition_errors() {
        let (a, b) = unit();
        let gap = vec![
            (PointGerm::plus(a.clone()), PointGerm::minus(q(1, 4)), q(0, 1)),
            (PointGerm::plus(q(1, 4)), PointGerm::minus(b.clone()), q(1, 1)),
        ];
        assert!(matches!(StepFunction::from_piecewise(a.clone(), b.clone(), gap), Err(Error::GapInPartition(_))));
        let overlap = vec![
            (PointGerm::plus(a.clone()), PointGerm::plus(q(1, 2)), q(0, 1)),
            (PointGerm::minus(q(1, 2)), PointGerm::minus(b.clone()), q(1, 1)),
        ];
        assert!(matches!(StepFunction::from_piecewise(a, b, overlap), Err(Error::OverlappingSegments(_))));
    }

    #[test]
    fn eval_at_germs_and_boundary_identity() {
        let (a, b) = unit();
        let s = StepFunction::sigma(a.clone(), b.clone(), PointGerm::minus(q(1, 2)));
        assert_eq!(s.eval_point(&q(1, 2)), q(1, 2));
        let phi = s.add(&StepFunction::constant(a.clone(), b.clone(), q(3, 1)));
        let lhs = phi.eval_step(&Locus::Germ(PointGerm::plus(a))) + phi.eval_step(&Locus::Germ(PointGerm::minus(b)));
        assert_eq!(lhs, *phi.w0());
    }

    #[test]
    fn single_branch_operator_on_sigma() {
        let spec = catalog::golden_map::<Rational>();
        let s = StepFunction::sigma(q(0, 1), q(1, 1), PointGerm::minus(q(1, 4)));
        let out = apply_branch_operator(&spec, 0, &s).unwrap();
        assert_eq!(out, StepFunction::sigma(q(0, 1), q(1, 1), PointGerm::minus(q(1, 2))));
    }

    #[test]
    fn l_of_one_on_golden_map() {
        let spec = catalog::golden_map::<Rational>();
        let l1 = apply_l(&spec, &StepFunction::ones_for(&spec)).unwrap();
        assert_eq!(l1.eval_point(&q(3, 10)), q(2, 1));
        assert_eq!(l1.eval_point(&q(7, 10)), q(1, 1));
        assert!(apply_l(&spec, &StepFunction::zero_for(&spec)).unwrap().is_zero());
    }

    #[test]
    fn transfer_ones_on_golden_map() {
        let spec = catalog::golden_map::<Rational>();
        assert_eq!(transfer_ones(&spec, 1, &q(3, 10)).unwrap(), q(2, 1));
        assert_eq!(transfer_ones(&spec, 1, &q(7, 10)).unwrap(), q(1, 1));
        assert_eq!(transfer_ones(&spec, 0, &q(7, 10)).unwrap(), Rational::one());
        let f = catalog::golden_map::<f64>();
        assert_eq!(transfer_ones(&f, 1, &0.3).unwrap(), 2.0);
    }

    #[test]
    fn iterates_match_transfer_ones() {
        for spec in [catalog::golden_map::<Rational>(), catalog::tent_map(), catalog::flip_map()] {
            let it = iterate_ones(&spec, 6).unwrap();
            for (n, phi) in it.iter().enumerate() {
                for y in [q(1, 7), q(2, 5), q(5, 9), q(13, 14)] {
                    assert_eq!(phi.eval_point(&y), transfer_ones(&spec, n, &y).unwrap(), "n={n} y={y}");
                }
            }
        }
    }

    #[test]
    fn tent_iterates_are_powers_of_two() {
        let spec = catalog::tent_map::<Rational>();
        let it = iterate_ones(&spec, 8).unwrap();
        for (n, phi) in it.iter().enumerate() {
            assert_eq!(phi.sup_norm(), Rational::from_i64(1 << n));
        }
    }

    fn arb_step() -> impl Strategy<Value = StepFunction<Rational>> {
        proptest::collection::vec((1i64..40, any::<bool>(), -5i64..=5), 0..8).prop_flat_map(|raw| {
            (-4i64..=4).prop_map(move |w0| {
                let terms = raw
                    .iter()
                    .map(|&(n, plus, w)| {
                        let dir = if plus { Sign::Plus } else { Sign::Minus };
                        (PointGerm::new(q(n, 40), dir), Rational::from_i64(w))
                    })
                    .collect();
                StepFunction::new(q(0, 1), q(1, 1), Rational::from_i64(w0), terms)
            })
        })
    }

    fn mesh_variation(phi: &StepFunction<Rational>) -> Rational {
        let reps = phi.piece_representatives();
        reps.windows(2).fold(Rational::zero(), |acc, w| acc + (phi.eval_point(&w[1]) - phi.eval_point(&w[0])).abs())
    }

    proptest! {
        #[test]
        fn norm_matches_mesh_variation(phi in arb_step()) {
            prop_assert_eq!(phi.bv_norm().variation, mesh_variation(&phi));
        }

        #[test]
        fn sup_bounded_by_half_norm(phi in arb_step()) {
            prop_assert!(phi.sup_norm() <= phi.bv_norm().norm * Rational::half());
        }

        #[test]
        fn round_trip_through_pieces(phi in arb_step()) {
            let mut bounds = vec![PointGerm::plus(q(0, 1))];
            bounds.extend(phi.terms().iter().map(|(g, _)| g.clone()));
            bounds.push(PointGerm::minus(q(1, 1)));
            let reps = phi.piece_representatives();
            let segs = bounds.windows(2).zip(reps.iter())
                .map(|(w, x)| (w[0].clone(), w[1].clone(), phi.eval_point(x)))
                .collect();
            prop_assert_eq!(StepFunction::from_piecewise(q(0, 1), q(1, 1), segs).unwrap(), phi);
        }

        #[test]
        fn apply_l_matches_definition(phi in arb_step(), ys in proptest::collection::vec(1i64..997, 1..20)) {
            for spec in [catalog::golden_map::<Rational>(), catalog::tent_map(), catalog::weighted_golden_map(q(3, 2), q(-1, 3))] {
                let lphi = apply_l(&spec, &phi).unwrap();
                for y in &ys {
                    let y = q(*y, 997);
                    let mut expect = Rational::zero();
                    for (k, br) in spec.branches().iter().enumerate() {
                        if let Some(x) = spec.inverse_branch(k, &y) {
                            expect = expect + br.weight.clone() * phi.eval_point(&x);
                        }
                    }
                    prop_assert_eq!(lphi.eval_point(&y), expect);
                }
            }
        }
    }
}
