//! Point germs and the germ dynamics of a piecewise monotone map.
//!
//! A point germ `x^+` or `x^-` is a point together with a side. Germs and
//! plain points are totally ordered by `x^- < x < x^+ < y^-` whenever
//! `x < y`. The germ interval of `(a, b)` is `[a^+, b^-]`; the germs `a^-`
//! and `b^+` never occur.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::Mul;

use crate::error::{Error, Result};
use crate::map::MapSpec;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn value(self) -> i64 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn as_scalar<F: crate::scalar::Scalar>(self) -> F {
        F::from_i64(self.value())
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs { Sign::Plus } else { Sign::Minus }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointGerm<T> {
    pub base: T,
    pub dir: Sign,
}

impl<T> PointGerm<T> {
    pub fn new(base: T, dir: Sign) -> Self {
        Self { base, dir }
    }

    pub fn plus(base: T) -> Self {
        Self { base, dir: Sign::Plus }
    }

    pub fn minus(base: T) -> Self {
        Self { base, dir: Sign::Minus }
    }
}

impl<T: fmt::Display> fmt::Display for PointGerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.dir == Sign::Plus { '+' } else { '-' };
        write!(f, "{}{}", self.base, s)
    }
}

/// A plain point or a germ, for comparisons that mix the two.
#[derive(Clone, Debug, PartialEq)]
pub enum Locus<T> {
    Point(T),
    Germ(PointGerm<T>),
}

impl<T: Real> Locus<T> {
    fn parts(&self) -> (&T, i8) {
        match self {
            Locus::Point(x) => (x, 0),
            Locus::Germ(g) => (&g.base, if g.dir == Sign::Plus { 1 } else { -1 }),
        }
    }
}

impl<T> From<PointGerm<T>> for Locus<T> {
    fn from(g: PointGerm<T>) -> Self {
        Locus::Germ(g)
    }
}

fn base_cmp<T: PartialOrd>(a: &T, b: &T) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

/// Lexicographic order on `(base, side)` with `- < point < +`.
pub fn locus_compare<T: Real>(u: &Locus<T>, v: &Locus<T>) -> Ordering {
    let (ub, ur) = u.parts();
    let (vb, vr) = v.parts();
    base_cmp(ub, vb).then(ur.cmp(&vr))
}

pub fn germ_compare<T: Real>(u: &PointGerm<T>, v: &PointGerm<T>) -> Ordering {
    base_cmp(&u.base, &v.base).then(u.dir.cmp(&v.dir))
}

/// Side of `x` relative to the jump of `sigma_w`: `Plus` when `x > w`.
pub fn sigma_sign<T: Real>(w: &Locus<T>, x: &Locus<T>) -> Result<Sign> {
    match locus_compare(x, w) {
        Ordering::Greater => Ok(Sign::Plus),
        Ordering::Less => Ok(Sign::Minus),
        Ordering::Equal => Err(Error::UndefinedSigma),
    }
}

/// Value of the base step function `sigma_w` at `x`: `+1/2` above the jump,
/// `-1/2` below it.
pub fn sigma_at<T: Real>(w: &Locus<T>, x: &Locus<T>) -> Result<T> {
    Ok(sigma_sign(w, x)?.as_scalar::<T>() * T::half())
}

/// `sigma_c(u)` for a plain cut point `c` and a germ `u`; never undefined.
pub fn sigma_point_at_germ<T: Real>(c: &T, u: &PointGerm<T>) -> Sign {
    match base_cmp(&u.base, c) {
        Ordering::Greater => Sign::Plus,
        Ordering::Less => Sign::Minus,
        Ordering::Equal => u.dir,
    }
}

/// Whether the germ lies in `[a^+, b^-]`.
pub fn in_germ_interval<T: Real>(spec: &MapSpec<T>, u: &PointGerm<T>) -> bool {
    let (a, b) = (spec.a(), spec.b());
    if u.base < *a || u.base > *b {
        return false;
    }
    !((u.base == *a && u.dir == Sign::Minus) || (u.base == *b && u.dir == Sign::Plus))
}

/// Branch whose germ interval `[c_k^+, c_{k+1}^-]` contains `u`.
pub fn branch_of_germ<T: Real>(spec: &MapSpec<T>, u: &PointGerm<T>) -> Result<usize> {
    if !in_germ_interval(spec, u) {
        return Err(Error::OutOfDomain(format!("germ {u} outside the germ interval")));
    }
    if let Some(j) = spec.cut_index(&u.base) {
        return Ok(if u.dir == Sign::Plus { j } else { j - 1 });
    }
    if !T::EXACT {
        let eps = spec.tolerances().eps_germ;
        if let Some(c) = spec.cuts().iter().find(|c| u.base.near(c, eps)) {
            return Err(Error::NumericAmbiguity(format!("germ {u} lies within {eps:e} of cut point {c}")));
        }
    }
    let idx = spec.cuts().partition_point(|c| *c <= u.base);
    Ok(idx - 1)
}

/// Extended germ map: `f(u^e) = (f_k(u))^{s_k e}`, using one-sided limits
/// at cut points. Images within `eps_germ` of a cut point snap onto it in
/// numeric mode.
pub fn germ_step<T: Real>(spec: &MapSpec<T>, u: &PointGerm<T>) -> Result<PointGerm<T>> {
    let k = branch_of_germ(spec, u)?;
    let cuts = spec.cuts();
    let value = if u.base == cuts[k] {
        spec.endpoint_value(k, true)
    } else if u.base == cuts[k + 1] {
        spec.endpoint_value(k, false)
    } else {
        spec.eval_branch(k, &crate::map::BranchPoint::At(u.base.clone()))?
    };
    let image = PointGerm::new(spec.snap(value), spec.branch(k).sign * u.dir);
    if !in_germ_interval(spec, &image) {
        let msg = format!("image {image} of {u} leaves the germ interval");
        return Err(if T::EXACT { Error::OutOfDomain(msg) } else { Error::NumericAmbiguity(msg) });
    }
    Ok(image)
}

/// Preperiod `p` and period `q` with `germs[p + q] == germs[p]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub preperiod: usize,
    pub period: usize,
}

#[derive(Clone, Debug)]
pub struct GermOrbit<T> {
    /// `f^n(u)` for `n = 0..=N`.
    pub germs: Vec<PointGerm<T>>,
    /// Branch index of `germs[n]` for `n < N`.
    pub itinerary: Vec<usize>,
    /// `s^(n)(u)`, with `s^(0) = +1`.
    pub cumulative_signs: Vec<Sign>,
    /// `g^(n)(u)`, with `g^(0) = 1`.
    pub cumulative_weights: Vec<T>,
    pub cycle: Option<Cycle>,
    eps_germ: f64,
}

impl<T: Real> GermOrbit<T> {
    pub fn len(&self) -> usize {
        self.germs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.germs.is_empty()
    }

    pub fn eps_germ(&self) -> f64 {
        self.eps_germ
    }
}

/// Germ ordered by [`germ_compare`], for use as a map key.
#[derive(Clone, Debug)]
struct Key<T>(PointGerm<T>);

impl<T: Real> PartialEq for Key<T> {
    fn eq(&self, other: &Self) -> bool {
        germ_compare(&self.0, &other.0) == Ordering::Equal
    }
}

impl<T: Real> Eq for Key<T> {}

impl<T: Real> PartialOrd for Key<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Key<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        germ_compare(&self.0, &other.0)
    }
}

/// Ordered set of germs with tolerance-aware membership: in numeric mode a
/// germ matches any stored germ of the same side within `eps`.
pub(crate) struct GermIndex<T> {
    map: BTreeMap<Key<T>, usize>,
    eps: Option<T>,
}

impl<T: Real> GermIndex<T> {
    pub(crate) fn new(eps: f64) -> Self {
        let eps = if T::EXACT { None } else { T::from_f64(eps) };
        Self { map: BTreeMap::new(), eps }
    }

    /// Smallest stored index among the germs matching `g`.
    pub(crate) fn find(&self, g: &PointGerm<T>) -> Option<usize> {
        let Some(eps) = &self.eps else {
            return self.map.get(&Key(g.clone())).copied();
        };
        let lo = Key(PointGerm::minus(g.base.clone() - eps.clone()));
        let hi = Key(PointGerm::plus(g.base.clone() + eps.clone()));
        self.map.range(lo..=hi).filter(|(k, _)| k.0.dir == g.dir).map(|(_, i)| *i).min()
    }

    pub(crate) fn insert(&mut self, g: PointGerm<T>, index: usize) {
        self.map.entry(Key(g)).or_insert(index);
    }
}

/// First repetition in a germ sequence, found in `O(N log N)` comparisons.
fn first_repetition<T: Real>(germs: &[PointGerm<T>], eps: f64) -> Option<Cycle> {
    let mut index = GermIndex::new(eps);
    for (n, g) in germs.iter().enumerate() {
        if let Some(p) = index.find(g) {
            return Some(Cycle { preperiod: p, period: n - p });
        }
        index.insert(g.clone(), n);
    }
    None
}

/// Minimal `(p, q)` with `germs[p + q] = germs[p]`, or `None` if the stored
/// orbit never repeats.
pub fn detect_cycle<T: Real>(orbit: &GermOrbit<T>) -> Option<Cycle> {
    first_repetition(&orbit.germs, orbit.eps_germ)
}

/// Forward orbit `u, f(u), ..., f^N(u)` with cumulative signs and weights.
pub fn germ_orbit<T: Real>(spec: &MapSpec<T>, u: &PointGerm<T>, nmax: usize) -> Result<GermOrbit<T>> {
    let mut orbit = orbit_prefix(spec, u, nmax, false)?;
    orbit.cycle = detect_cycle(&orbit);
    Ok(orbit)
}

/// Orbit computed only until its first repetition (or `max_steps`).
pub fn germ_orbit_until_cycle<T: Real>(spec: &MapSpec<T>, u: &PointGerm<T>, max_steps: usize) -> Result<GermOrbit<T>> {
    orbit_prefix(spec, u, max_steps, true)
}

fn orbit_prefix<T: Real>(spec: &MapSpec<T>, u: &PointGerm<T>, nmax: usize, stop_at_cycle: bool) -> Result<GermOrbit<T>> {
    if !in_germ_interval(spec, u) {
        return Err(Error::OutOfDomain(format!("germ {u} outside the germ interval")));
    }
    let eps = spec.tolerances().eps_germ;
    let mut germs = vec![u.clone()];
    let mut itinerary = Vec::with_capacity(nmax);
    let mut signs = vec![Sign::Plus];
    let mut weights = vec![T::one()];
    let mut index = GermIndex::new(eps);
    let mut cycle = None;
    if stop_at_cycle {
        index.insert(u.clone(), 0);
    }
    for n in 0..nmax {
        let cur = &germs[n];
        let k = branch_of_germ(spec, cur)?;
        let next = germ_step(spec, cur)?;
        itinerary.push(k);
        signs.push(signs[n] * spec.branch(k).sign);
        weights.push(weights[n].clone() * spec.branch(k).weight.clone());
        if stop_at_cycle {
            if let Some(p) = index.find(&next) {
                cycle = Some(Cycle { preperiod: p, period: n + 1 - p });
                germs.push(next);
                break;
            }
            index.insert(next.clone(), n + 1);
        }
        germs.push(next);
    }
    Ok(GermOrbit { germs, itinerary, cumulative_signs: signs, cumulative_weights: weights, cycle, eps_germ: eps })
}

/// `a^+`, `c_j^-`, `c_j^+` for interior cuts, and `b^-`, in increasing order.
pub fn mandatory_germs<T: Real>(spec: &MapSpec<T>) -> Vec<PointGerm<T>> {
    let mut out = vec![PointGerm::plus(spec.a().clone())];
    for c in &spec.cuts()[1..=spec.d()] {
        out.push(PointGerm::minus(c.clone()));
        out.push(PointGerm::plus(c.clone()));
    }
    out.push(PointGerm::minus(spec.b().clone()));
    out
}

/// Smallest forward-invariant germ set containing `seeds` and the
/// boundary and cut germs, sorted in germ order. Errors with
/// [`Error::TooLarge`] once more than `nmax` germs accumulate.
pub fn germ_closure<T: Real>(spec: &MapSpec<T>, seeds: &[PointGerm<T>], nmax: usize) -> Result<Vec<PointGerm<T>>> {
    let eps = spec.tolerances().eps_germ;
    let mut index = GermIndex::new(eps);
    let mut all: Vec<PointGerm<T>> = Vec::new();
    let mut frontier = Vec::new();
    for g in mandatory_germs(spec).into_iter().chain(seeds.iter().cloned()) {
        if !in_germ_interval(spec, &g) {
            return Err(Error::OutOfDomain(format!("seed germ {g} outside the germ interval")));
        }
        if index.find(&g).is_none() {
            index.insert(g.clone(), all.len());
            all.push(g.clone());
            frontier.push(g);
        }
    }
    while let Some(g) = frontier.pop() {
        if all.len() > nmax {
            return Err(Error::TooLarge { limit: nmax });
        }
        let next = germ_step(spec, &g)?;
        if index.find(&next).is_none() {
            index.insert(next.clone(), all.len());
            all.push(next.clone());
            frontier.push(next);
        }
    }
    if all.len() > nmax {
        return Err(Error::TooLarge { limit: nmax });
    }
    all.sort_by(germ_compare);
    Ok(all)
}
