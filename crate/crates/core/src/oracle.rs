//! Brute-force ground truth: cylinder sets of iterates, lap counts,
//! partition functions, Markov transition matrices and periodic points.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::germ::{branch_of_germ, germ_compare, germ_step, PointGerm, Sign};
use crate::linalg::Matrix;
use crate::map::MapSpec;
use crate::poly::Poly;
use crate::scalar::Real;

/// A maximal monotonicity interval `<left, right>` of `f^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder<T> {
    pub left: PointGerm<T>,
    pub right: PointGerm<T>,
    /// `g^(n)` on the cylinder.
    pub weight: T,
    pub itinerary: Vec<usize>,
    /// Orientation of `f^n` on the cylinder.
    pub sign: Sign,
    /// `f^n(left)` and `f^n(right)`.
    pub image: (PointGerm<T>, PointGerm<T>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CylinderSet<T> {
    pub n: usize,
    pub cylinders: Vec<Cylinder<T>>,
}

impl<T: Real> CylinderSet<T> {
    pub fn len(&self) -> usize {
        self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    /// `Omega_n`, the sum of cylinder weights.
    pub fn omega(&self) -> T {
        self.cylinders.iter().fold(T::zero(), |acc, c| acc + c.weight.clone())
    }
}

/// The branch intervals as cylinders of depth one.
pub fn first_cylinders<T: Real>(spec: &MapSpec<T>) -> Result<CylinderSet<T>> {
    let cuts = spec.cuts();
    let cylinders = (0..spec.branches().len())
        .map(|k| {
            let left = PointGerm::plus(cuts[k].clone());
            let right = PointGerm::minus(cuts[k + 1].clone());
            let br = spec.branch(k);
            Ok(Cylinder {
                image: (germ_step(spec, &left)?, germ_step(spec, &right)?),
                left,
                right,
                weight: br.weight.clone(),
                itinerary: vec![k],
                sign: br.sign,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CylinderSet { n: 1, cylinders })
}

/// Cuts the image `<p, q>` of a cylinder at the interior cut points it
/// contains. Returns the inner cuts and the pieces in increasing order.
fn split_image<T: Real>(spec: &MapSpec<T>, p: &PointGerm<T>, q: &PointGerm<T>) -> (Vec<T>, Vec<(PointGerm<T>, PointGerm<T>)>) {
    let eps = spec.tolerances().eps_germ;
    let (img_lo, img_hi) = if p.base <= q.base { (p.clone(), q.clone()) } else { (q.clone(), p.clone()) };
    let (lo, hi) = (&img_lo.base, &img_hi.base);
    let inner: Vec<T> = spec.cuts()[1..=spec.d()]
        .iter()
        .filter(|c| *c > lo && *c < hi && !c.near(lo, eps) && !c.near(hi, eps))
        .cloned()
        .collect();
    let mut pieces = Vec::with_capacity(inner.len() + 1);
    let mut start = img_lo.clone();
    for c in &inner {
        pieces.push((start, PointGerm::minus(c.clone())));
        start = PointGerm::plus(c.clone());
    }
    pieces.push((start, img_hi));
    (inner, pieces)
}

fn refine_one<T: Real>(spec: &MapSpec<T>, cyl: &Cylinder<T>) -> Result<Vec<Cylinder<T>>> {
    let eps = spec.tolerances().eps_germ;
    let (inner, img_pieces) = split_image(spec, &cyl.image.0, &cyl.image.1);

    // preimages of the inner cuts inside the cylinder
    let mut splits = Vec::with_capacity(inner.len());
    for c in &inner {
        let mut y = c.clone();
        for &k in cyl.itinerary.iter().rev() {
            y = spec
                .inverse_branch(k, &y)
                .ok_or_else(|| Error::NumericAmbiguity(format!("no preimage of {c} along the cylinder at {}", cyl.left)))?;
        }
        if !T::EXACT && (y.near(&cyl.left.base, eps) || y.near(&cyl.right.base, eps)) {
            return Err(Error::NumericAmbiguity(format!("preimage {y} of {c} lies at the cylinder boundary")));
        }
        splits.push(y);
    }
    // domain pieces, aligned with the image pieces
    let mut bounds = Vec::with_capacity(splits.len() + 2);
    if cyl.sign == Sign::Plus {
        bounds.push(cyl.left.clone());
        for x in &splits {
            bounds.push(PointGerm::minus(x.clone()));
            bounds.push(PointGerm::plus(x.clone()));
        }
        bounds.push(cyl.right.clone());
    } else {
        bounds.push(cyl.right.clone());
        for x in &splits {
            bounds.push(PointGerm::plus(x.clone()));
            bounds.push(PointGerm::minus(x.clone()));
        }
        bounds.push(cyl.left.clone());
    }
    let mut out = Vec::with_capacity(img_pieces.len());
    for (i, (ilo, ihi)) in img_pieces.into_iter().enumerate() {
        let (d0, d1) = (bounds[2 * i].clone(), bounds[2 * i + 1].clone());
        let k = branch_of_germ(spec, &ilo)?;
        let br = spec.branch(k);
        let (left, right, img_left, img_right) = if cyl.sign == Sign::Plus { (d0, d1, ilo, ihi) } else { (d1, d0, ihi, ilo) };
        let mut itinerary = cyl.itinerary.clone();
        itinerary.push(k);
        out.push(Cylinder {
            image: (germ_step(spec, &img_left)?, germ_step(spec, &img_right)?),
            left,
            right,
            weight: cyl.weight.clone() * br.weight.clone(),
            itinerary,
            sign: cyl.sign * br.sign,
        });
    }
    if cyl.sign == Sign::Minus {
        out.reverse();
    }
    Ok(out)
}

/// `Z_{n+1}` from `Z_n` by cutting each cylinder at the preimages of the
/// interior cut points.
pub fn refine<T: Real>(spec: &MapSpec<T>, set: &CylinderSet<T>) -> Result<CylinderSet<T>> {
    let parts = set.cylinders.par_iter().map(|c| refine_one(spec, c)).collect::<Vec<_>>();
    let mut cylinders = Vec::with_capacity(set.len() * 2);
    for p in parts {
        cylinders.extend(p?);
    }
    Ok(CylinderSet { n: set.n + 1, cylinders })
}

/// The cylinder set `Z_n`, `n >= 1`.
pub fn cylinders<T: Real>(spec: &MapSpec<T>, n: usize) -> Result<CylinderSet<T>> {
    if n == 0 {
        return Err(Error::Usage("cylinder depth must be at least 1".into()));
    }
    let mut set = first_cylinders(spec)?;
    for _ in 1..n {
        set = refine(spec, &set)?;
    }
    Ok(set)
}

/// `Omega_n`; the lap number of `f^n` for unit weights.
pub fn omega_n<T: Real>(spec: &MapSpec<T>, n: usize) -> Result<T> {
    Ok(cylinders(spec, n)?.omega())
}

/// `Omega_1..=Omega_nmax`. Cylinders with the same image interval have
/// the same future, so they are tracked as one class carrying the summed
/// weight instead of being enumerated.
pub fn omega_sequence<T: Real>(spec: &MapSpec<T>, nmax: usize) -> Result<Vec<T>> {
    let eps = spec.tolerances().eps_germ;
    let same = |u: &PointGerm<T>, v: &PointGerm<T>| u.dir == v.dir && u.base.near(&v.base, eps);
    let ordered = |u: PointGerm<T>, v: PointGerm<T>| if germ_compare(&u, &v) == Ordering::Greater { (v, u) } else { (u, v) };
    let mut classes: Vec<(PointGerm<T>, PointGerm<T>, T)> = Vec::new();
    for c in first_cylinders(spec)?.cylinders {
        let (lo, hi) = ordered(c.image.0, c.image.1);
        classes.push((lo, hi, c.weight));
    }
    let mut out = Vec::with_capacity(nmax);
    for n in 1..=nmax {
        classes.sort_by(|x, y| germ_compare(&x.0, &y.0).then_with(|| germ_compare(&x.1, &y.1)));
        let mut merged: Vec<(PointGerm<T>, PointGerm<T>, T)> = Vec::with_capacity(classes.len());
        for (lo, hi, w) in classes {
            match merged.last_mut() {
                Some((l, h, acc)) if same(l, &lo) && same(h, &hi) => *acc = acc.clone() + w,
                _ => merged.push((lo, hi, w)),
            }
        }
        out.push(merged.iter().fold(T::zero(), |acc, c| acc + c.2.clone()));
        if n == nmax {
            break;
        }
        let mut next = Vec::with_capacity(merged.len() * 2);
        for (lo, hi, w) in &merged {
            for (ilo, ihi) in split_image(spec, lo, hi).1 {
                let k = branch_of_germ(spec, &ilo)?;
                let (nlo, nhi) = ordered(germ_step(spec, &ilo)?, germ_step(spec, &ihi)?);
                next.push((nlo, nhi, w.clone() * spec.branch(k).weight.clone()));
            }
        }
        classes = next;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntropyEstimate {
    /// `log(Omega_nmax) / nmax`
    pub value: f64,
    /// `log(Omega_n) / n` for `n = 1..=nmax`.
    pub sequence: Vec<f64>,
}

pub fn entropy_oracle<T: Real>(spec: &MapSpec<T>, nmax: usize) -> Result<EntropyEstimate> {
    spec.require_nonnegative_weights()?;
    let sequence: Vec<f64> =
        omega_sequence(spec, nmax)?.iter().enumerate().map(|(i, w)| w.as_f64().ln() / (i + 1) as f64).collect();
    let value = sequence.last().copied().unwrap_or(0.0);
    Ok(EntropyEstimate { value, sequence })
}

/// Both sides of `2 Omega_n = g^(n)(a+) + g^(n)(b-) + sum_j sum_k ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaIdentity<T> {
    pub lhs: T,
    pub rhs: T,
    pub residual: T,
}

/// `g^(m)(u)`: the weight product along the first `m` steps of the orbit.
fn germ_weight<T: Real>(spec: &MapSpec<T>, u: &PointGerm<T>, m: usize) -> Result<T> {
    let mut w = T::one();
    let mut g = u.clone();
    for _ in 0..m {
        let k = branch_of_germ(spec, &g)?;
        w = w * spec.branch(k).weight.clone();
        g = germ_step(spec, &g)?;
    }
    Ok(w)
}

/// Checks the 2-Omega identity. Each interior cylinder endpoint `x` is
/// attributed to the smallest `k` with `f^k(x)` a cut point `c_j`; the
/// weight of such points is summed over the backward orbit of `c_j` that
/// avoids cut points.
pub fn omega_identity_check<T: Real>(spec: &MapSpec<T>, n: usize) -> Result<OmegaIdentity<T>> {
    spec.require_nonnegative_weights()?;
    let two = T::from_i64(2);
    let lhs = two * omega_n(spec, n)?;
    let eps = spec.tolerances().eps_germ;
    let mut rhs = germ_weight(spec, &PointGerm::plus(spec.a().clone()), n)?
        + germ_weight(spec, &PointGerm::minus(spec.b().clone()), n)?;
    for c in &spec.cuts()[1..=spec.d()] {
        let mut level: Vec<(T, T)> = vec![(c.clone(), T::one())];
        for k in 0..n {
            let mass = level.iter().fold(T::zero(), |acc, (_, w)| acc + w.clone());
            if !mass.is_zero() {
                let m = n - k;
                let ends = germ_weight(spec, &PointGerm::minus(c.clone()), m)? + germ_weight(spec, &PointGerm::plus(c.clone()), m)?;
                rhs = rhs + mass * ends;
            }
            if k + 1 == n {
                break;
            }
            let mut next = Vec::new();
            for (y, w) in &level {
                for (i, br) in spec.branches().iter().enumerate() {
                    if let Some(x) = spec.inverse_branch(i, y) {
                        if spec.cuts().iter().any(|cc| x.near(cc, eps)) {
                            continue;
                        }
                        next.push((x, w.clone() * br.weight.clone()));
                    }
                }
            }
            level = next;
        }
    }
    let residual = (lhs.clone() - rhs.clone()).abs();
    Ok(OmegaIdentity { lhs, rhs, residual })
}

/// Transition matrix of a Markov map: entry `(j, k)` is `g_j` when
/// `f(I_j)` contains `I_k`.
pub fn markov_transition<T: Real>(spec: &MapSpec<T>) -> Result<Matrix<T>> {
    let eps = spec.tolerances().eps_markov;
    let cuts = spec.cuts();
    let snap = |x: &T| cuts.iter().find(|c| x.near(c, eps)).cloned();
    let n = spec.branches().len();
    let mut m = Matrix::<T>::zeros(n, n);
    for j in 0..n {
        let (lo, hi) = spec.image_bounds(j);
        let (slo, shi) = match (snap(&lo), snap(&hi)) {
            (Some(l), Some(h)) => (l, h),
            _ => return Err(Error::NotMarkov { branch: j, image: format!("({lo}, {hi})") }),
        };
        for k in 0..n {
            if cuts[k] >= slo && cuts[k + 1] <= shi {
                m.set(j, k, spec.branch(j).weight.clone());
            }
        }
    }
    Ok(m)
}

/// `det(1 - t T)` with ascending coefficients.
pub fn ruelle_determinant<T: Real>(transition: &Matrix<T>) -> Poly<T> {
    transition.one_minus_t().determinant()
}

/// Whether fixed points of `f^n` at cylinder endpoints are counted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundaryOrbits {
    /// Count fixed germs `f^n(x^e) = x^e` at cylinder ends. This reproduces
    /// `tr T^n` for Markov maps.
    #[default]
    Include,
    /// Count only fixed points inside the open cylinders.
    Exclude,
}

/// Number of fixed points of `f^n`, one cylinder of `Z_n` at a time: an
/// interior fixed point exists when `f^n(x) - x` changes sign between the
/// cylinder ends.
pub fn periodic_point_count<T: Real>(spec: &MapSpec<T>, n: usize, convention: BoundaryOrbits) -> Result<usize> {
    let eps = spec.tolerances().eps_germ;
    let set = cylinders(spec, n)?;
    let mut count = 0;
    for cyl in &set.cylinders {
        let (p, q) = &cyl.image;
        let dl = p.base.clone() - cyl.left.base.clone();
        let dr = q.base.clone() - cyl.right.base.clone();
        let zl = p.base.near(&cyl.left.base, eps);
        let zr = q.base.near(&cyl.right.base, eps);
        if zl && zr && cyl.sign == Sign::Plus {
            return Err(Error::NumericAmbiguity(format!(
                "f^{n} fixes both ends of the cylinder ({}, {}); the fixed points are not isolated",
                cyl.left.base, cyl.right.base
            )));
        }
        if !zl && !zr && (dl > T::zero()) != (dr > T::zero()) {
            count += 1;
        }
        if convention == BoundaryOrbits::Include {
            if zl && p.dir == cyl.left.dir {
                count += 1;
            }
            if zr && q.dir == cyl.right.dir {
                count += 1;
            }
        }
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::scalar::{Rational, Scalar};
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn fib_laps(n: usize) -> i64 {
        let (mut a, mut b) = (1i64, 2i64);
        for _ in 1..n {
            (a, b) = (b, a + b);
        }
        b
    }

    #[test]
    fn golden_cylinders() {
        let spec = catalog::golden_map::<Rational>();
        let z1 = cylinders(&spec, 1).unwrap();
        assert_eq!(z1.len(), 2);
        let z2 = cylinders(&spec, 2).unwrap();
        let ends: Vec<(Rational, Rational)> = z2.cylinders.iter().map(|c| (c.left.base.clone(), c.right.base.clone())).collect();
        assert_eq!(ends, vec![(q(0, 1), q(1, 4)), (q(1, 4), q(1, 2)), (q(1, 2), q(1, 1))]);
        assert_eq!(z2.cylinders[1].itinerary, vec![0, 1]);
        assert_eq!(cylinders(&spec, 3).unwrap().len(), 5);
        for n in 1..=12 {
            assert_eq!(omega_n(&spec, n).unwrap(), Rational::from_i64(fib_laps(n)));
        }
    }

    #[test]
    fn image_classes_match_enumeration() {
        for spec in [catalog::golden_map::<Rational>(), catalog::tent_map(), catalog::weighted_golden_map(q(2, 3), q(5, 2)), catalog::flip_map()] {
            let seq = omega_sequence(&spec, 9).unwrap();
            for n in 1..=9 {
                assert_eq!(seq[n - 1], cylinders(&spec, n).unwrap().omega());
            }
        }
        let spec = catalog::irrational_rotation_like();
        let seq = omega_sequence(&spec, 9).unwrap();
        for n in 1..=9 {
            assert_eq!(seq[n - 1], cylinders(&spec, n).unwrap().omega());
        }
    }

    #[test]
    fn refinement_is_nested_and_ordered() {
        let spec = catalog::tent_map::<Rational>();
        let mut prev = cylinders(&spec, 1).unwrap();
        for _ in 0..6 {
            let next = refine(&spec, &prev).unwrap();
            assert!(next.len() >= prev.len());
            for w in next.cylinders.windows(2) {
                assert_eq!(w[0].right.base, w[1].left.base);
                assert!(w[0].left.base < w[0].right.base);
            }
            for c in &next.cylinders {
                assert!(prev.cylinders.iter().any(|p| p.left.base <= c.left.base && c.right.base <= p.right.base && p.itinerary[..] == c.itinerary[..prev.n]));
            }
            prev = next;
        }
    }

    #[test]
    fn tent_laps_double() {
        let spec = catalog::tent_map::<Rational>();
        let seq = omega_sequence(&spec, 10).unwrap();
        for (i, w) in seq.iter().enumerate() {
            assert_eq!(*w, Rational::from_i64(1 << (i + 1)));
        }
        let e = entropy_oracle(&spec, 10).unwrap();
        assert!(e.sequence.iter().all(|h| (h - 2f64.ln()).abs() < 1e-14));
    }

    #[test]
    fn entropy_examples() {
        let e = entropy_oracle(&catalog::golden_map::<Rational>(), 20).unwrap();
        assert!((e.value - 1.618_033_988_749_895f64.ln()).abs() < 0.05);
        let e = entropy_oracle(&catalog::identity_map::<Rational>(), 8).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(omega_n(&catalog::weighted_golden_map(q(0, 1), q(0, 1)), 3).unwrap(), q(0, 1));
    }

    #[test]
    fn numeric_cylinders_match_exact() {
        let e = omega_sequence(&catalog::golden_map::<Rational>(), 10).unwrap();
        let f = omega_sequence(&catalog::golden_map::<f64>(), 10).unwrap();
        for (x, y) in e.iter().zip(&f) {
            assert_eq!(x.as_f64(), *y);
        }
        let laps = omega_sequence(&catalog::beta_map(1.5), 8).unwrap();
        assert!(laps.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn omega_identity_residual_vanishes() {
        for spec in [catalog::golden_map::<Rational>(), catalog::tent_map(), catalog::weighted_golden_map(q(2, 3), q(5, 2)), catalog::flip_map()] {
            for n in 1..=6 {
                let id = omega_identity_check(&spec, n).unwrap();
                assert!(id.residual.is_zero(), "n={n}: {} vs {}", id.lhs, id.rhs);
            }
        }
        let id = omega_identity_check(&catalog::golden_map::<Rational>(), 3).unwrap();
        assert_eq!(id.lhs, q(10, 1));
        let id = omega_identity_check(&catalog::tent_map::<Rational>(), 2).unwrap();
        assert_eq!(id.lhs, q(8, 1));
    }

    #[test]
    fn transition_matrices() {
        let t = markov_transition(&catalog::golden_map::<Rational>()).unwrap();
        assert_eq!(t.to_rows(), vec![vec![q(1, 1), q(1, 1)], vec![q(1, 1), q(0, 1)]]);
        let t = markov_transition(&catalog::tent_map::<Rational>()).unwrap();
        assert_eq!(t.to_rows(), vec![vec![q(1, 1); 2]; 2]);
        let t = markov_transition(&catalog::weighted_golden_map(q(3, 1), q(1, 2))).unwrap();
        assert_eq!(t.to_rows(), vec![vec![q(3, 1), q(3, 1)], vec![q(1, 2), q(0, 1)]]);
    }

    #[test]
    fn non_markov_image() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let spec = MapSpec::new(
            0.0,
            1.0,
            vec![0.5],
            vec![crate::map::Branch::linear(2.0 * s, 0.0, 1.0), crate::map::Branch::linear(1.0, -0.5, 1.0)],
        )
        .unwrap();
        match markov_transition(&spec) {
            Err(Error::NotMarkov { branch: 0, .. }) => {}
            other => panic!("expected NotMarkov, got {other:?}"),
        }
    }

    #[test]
    fn ruelle_determinants() {
        let t = markov_transition(&catalog::golden_map::<Rational>()).unwrap();
        assert_eq!(ruelle_determinant(&t), Poly::new(vec![q(1, 1), q(-1, 1), q(-1, 1)]));
        let t = markov_transition(&catalog::tent_map::<Rational>()).unwrap();
        assert_eq!(ruelle_determinant(&t), Poly::new(vec![q(1, 1), q(-2, 1)]));
        let one = Matrix::from_rows(vec![vec![q(1, 1)]]);
        assert_eq!(ruelle_determinant(&one), Poly::new(vec![q(1, 1), q(-1, 1)]));
    }

    fn trace_power(t: &Matrix<Rational>, n: usize) -> Rational {
        let mut p = t.clone();
        for _ in 1..n {
            p = p.matmul(t);
        }
        (0..t.rows()).fold(q(0, 1), |acc, i| acc + p.get(i, i).clone())
    }

    #[test]
    fn periodic_points_match_traces() {
        for spec in [catalog::golden_map::<Rational>(), catalog::tent_map(), catalog::twin_golden_map()] {
            let t = markov_transition(&spec).unwrap();
            for n in 1..=8 {
                let c = periodic_point_count(&spec, n, BoundaryOrbits::Include).unwrap();
                assert_eq!(Rational::from_i64(c as i64), trace_power(&t, n), "n={n}");
            }
        }
        let spec = catalog::golden_map::<Rational>();
        assert_eq!(periodic_point_count(&spec, 1, BoundaryOrbits::Include).unwrap(), 1);
        assert_eq!(periodic_point_count(&spec, 2, BoundaryOrbits::Include).unwrap(), 3);
        assert_eq!(periodic_point_count(&spec, 1, BoundaryOrbits::Exclude).unwrap(), 0);
        assert_eq!(periodic_point_count(&spec, 2, BoundaryOrbits::Exclude).unwrap(), 0);
        let tent = catalog::tent_map::<Rational>();
        assert_eq!(periodic_point_count(&tent, 3, BoundaryOrbits::Exclude).unwrap(), 7);
    }

    #[test]
    fn identity_fixed_points_are_not_isolated() {
        let spec = catalog::identity_map::<Rational>();
        assert!(matches!(periodic_point_count(&spec, 1, BoundaryOrbits::Include), Err(Error::NumericAmbiguity(_))));
    }
}
