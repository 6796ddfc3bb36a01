//! Piecewise monotone interval maps.
//!
//! A map is given by cut points `a = c_0 < c_1 < ... < c_{d+1} = b` and one
//! strictly monotone branch per open interval `(c_k, c_{k+1})`. Branches are
//! indexed from zero: branch `k` lives on `(c_k, c_{k+1})`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result, Violation};
use crate::germ::{PointGerm, Sign};
use crate::scalar::Real;

/// Numeric tolerances. Exact mode ignores all of them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Germ equality and cut-point snapping.
    pub eps_germ: f64,
    /// Bisection tolerance for inverting generic branches.
    pub eps_inv: f64,
    /// Endpoint-to-cut distance accepted by the Markov test.
    pub eps_markov: f64,
    /// Step-function weights below this are dropped.
    pub eps_weight: f64,
    /// Grid points per branch for the monotonicity check of generic branches.
    pub validation_grid: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { eps_germ: 1e-12, eps_inv: 1e-13, eps_markov: 1e-9, eps_weight: 1e-15, validation_grid: 1000 }
    }
}

/// Evaluator for a branch given as an arbitrary monotone function.
pub type Evaluator<T> = Arc<dyn Fn(&T) -> T + Send + Sync>;

#[derive(Clone)]
pub struct GenericBranch<T> {
    pub evaluator: Evaluator<T>,
    /// One-sided limit at the left end of the branch domain.
    pub left_limit: T,
    /// One-sided limit at the right end of the branch domain.
    pub right_limit: T,
}

impl<T: fmt::Debug> fmt::Debug for GenericBranch<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericBranch")
            .field("left_limit", &self.left_limit)
            .field("right_limit", &self.right_limit)
            .finish_non_exhaustive()
    }
}

#[derive(Clone, Debug)]
pub enum BranchKind<T> {
    /// `x -> slope * x + intercept`
    Linear { slope: T, intercept: T },
    Generic(GenericBranch<T>),
}

#[derive(Clone, Debug)]
pub struct Branch<T> {
    pub kind: BranchKind<T>,
    /// Orientation: `Plus` for increasing branches.
    pub sign: Sign,
    pub weight: T,
}

impl<T: Real> Branch<T> {
    pub fn linear(slope: T, intercept: T, weight: T) -> Self {
        let sign = if slope < T::zero() { Sign::Minus } else { Sign::Plus };
        Self { kind: BranchKind::Linear { slope, intercept }, sign, weight }
    }

    pub fn generic(evaluator: Evaluator<T>, left_limit: T, right_limit: T, sign: Sign, weight: T) -> Self {
        Self { kind: BranchKind::Generic(GenericBranch { evaluator, left_limit, right_limit }), sign, weight }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, BranchKind::Linear { .. })
    }

    fn apply(&self, x: &T) -> T {
        match &self.kind {
            BranchKind::Linear { slope, intercept } => slope.clone() * x.clone() + intercept.clone(),
            BranchKind::Generic(g) => (g.evaluator)(x),
        }
    }
}

/// Argument of [`MapSpec::eval_branch`]: an interior point or a one-sided
/// endpoint limit.
#[derive(Clone, Debug, PartialEq)]
pub enum BranchPoint<T> {
    At(T),
    LeftEnd,
    RightEnd,
}

/// Where a point of `(a, b)` sits relative to the partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Location {
    Branch(usize),
    /// Index `j` into `c_0..c_{d+1}`.
    Cut(usize),
}

#[derive(Clone, Debug)]
pub struct MapSpec<T> {
    cuts: Vec<T>,
    branches: Vec<Branch<T>>,
    tol: Tolerances,
}

impl<T: Real> MapSpec<T> {
    /// Builds and validates a map on `(a, b)` with interior cut points
    /// `interior_cuts` (increasing) and one branch per piece.
    pub fn new(a: T, b: T, interior_cuts: Vec<T>, branches: Vec<Branch<T>>) -> Result<Self> {
        let spec = Self::unvalidated(a, b, interior_cuts, branches);
        spec.validate().map_err(Error::InvalidMap)?;
        Ok(spec)
    }

    /// Builds a map without checking any invariant.
    pub fn unvalidated(a: T, b: T, interior_cuts: Vec<T>, branches: Vec<Branch<T>>) -> Self {
        let mut cuts = Vec::with_capacity(interior_cuts.len() + 2);
        cuts.push(a);
        cuts.extend(interior_cuts);
        cuts.push(b);
        Self { cuts, branches, tol: Tolerances::default() }
    }

    /// Builds a map from `(lo, hi, branch)` pieces given in any order.
    pub fn from_pieces(a: T, b: T, mut pieces: Vec<(T, T, Branch<T>)>) -> Result<Self> {
        pieces.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut expected = a.clone();
        let mut interior = Vec::new();
        let mut branches = Vec::new();
        for (i, (lo, hi, br)) in pieces.into_iter().enumerate() {
            if lo != expected {
                return Err(Error::InvalidMap(vec![Violation::branch(
                    i,
                    format!("piece starts at {lo}, expected {expected}"),
                )]));
            }
            if i > 0 {
                interior.push(lo);
            }
            expected = hi;
            branches.push(br);
        }
        if expected != b {
            return Err(Error::InvalidMap(vec![Violation::global(format!(
                "pieces end at {expected}, expected {b}"
            ))]));
        }
        Self::new(a, b, interior, branches)
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn a(&self) -> &T {
        &self.cuts[0]
    }

    pub fn b(&self) -> &T {
        self.cuts.last().expect("at least two cut points")
    }

    /// All cut points `c_0..c_{d+1}`.
    pub fn cuts(&self) -> &[T] {
        &self.cuts
    }

    /// Number of interior cut points `d`.
    pub fn d(&self) -> usize {
        self.cuts.len() - 2
    }

    pub fn branches(&self) -> &[Branch<T>] {
        &self.branches
    }

    pub fn branch(&self, k: usize) -> &Branch<T> {
        &self.branches[k]
    }

    pub fn weights(&self) -> Vec<T> {
        self.branches.iter().map(|b| b.weight.clone()).collect()
    }

    /// `max_k |g_k|`
    pub fn max_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight.modulus()).fold(0.0, f64::max)
    }

    pub fn has_nonnegative_weights(&self) -> bool {
        self.branches.iter().all(|b| b.weight >= T::zero())
    }

    pub fn has_unit_weights(&self) -> bool {
        self.branches.iter().all(|b| b.weight == T::one())
    }

    /// Errors with [`Error::NegativeWeight`] on the first negative weight.
    pub fn require_nonnegative_weights(&self) -> Result<()> {
        match self.branches.iter().position(|b| b.weight < T::zero()) {
            Some(k) => Err(Error::NegativeWeight(k)),
            None => Ok(()),
        }
    }

    pub fn all_linear(&self) -> bool {
        self.branches.iter().all(Branch::is_linear)
    }

    /// Checks every structural invariant and reports all violations.
    pub fn validate(&self) -> std::result::Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.cuts.len() < 2 {
            out.push(Violation::global("interval needs two endpoints"));
            return Err(out);
        }
        if self.cuts.iter().any(|c| !c.is_finite_value()) {
            out.push(Violation::global("cut points must be finite"));
            return Err(out);
        }
        for (j, w) in self.cuts.windows(2).enumerate() {
            if w[0] >= w[1] {
                out.push(Violation::global(format!("cut points not strictly increasing at index {j}")));
            }
        }
        if self.branches.len() != self.cuts.len() - 1 {
            out.push(Violation::global(format!(
                "expected {} branches, found {}",
                self.cuts.len() - 1,
                self.branches.len()
            )));
        }
        if !out.is_empty() {
            return Err(out);
        }
        for (k, br) in self.branches.iter().enumerate() {
            if !br.weight.is_finite_value() {
                out.push(Violation::branch(k, "weight must be finite"));
            }
            self.validate_branch(k, br, &mut out);
        }
        if out.is_empty() {
            for (k, _) in self.branches.iter().enumerate() {
                for dir in [Sign::Plus, Sign::Minus] {
                    let base = if dir == Sign::Plus { self.cuts[k].clone() } else { self.cuts[k + 1].clone() };
                    let germ = PointGerm::new(base, dir);
                    if let Err(e) = crate::germ::germ_step(self, &germ) {
                        out.push(Violation::branch(k, format!("endpoint germ {germ} does not map into the germ interval: {e}")));
                    }
                }
            }
        }
        if out.is_empty() { Ok(()) } else { Err(out) }
    }

    fn validate_branch(&self, k: usize, br: &Branch<T>, out: &mut Vec<Violation>) {
        let (lo, hi) = (&self.cuts[k], &self.cuts[k + 1]);
        let (a, b) = (self.a(), self.b());
        match &br.kind {
            BranchKind::Linear { slope, intercept } => {
                if slope.is_zero() {
                    out.push(Violation::branch(k, "not strictly monotone"));
                    return;
                }
                if !slope.is_finite_value() || !intercept.is_finite_value() {
                    out.push(Violation::branch(k, "coefficients must be finite"));
                    return;
                }
                let expected = if *slope < T::zero() { Sign::Minus } else { Sign::Plus };
                if br.sign != expected {
                    out.push(Violation::branch(k, "sign does not match slope"));
                }
            }
            BranchKind::Generic(g) => {
                let n = self.tol.validation_grid.max(2);
                let width = hi.clone() - lo.clone();
                let mut prev = g.left_limit.clone();
                let mut ok = true;
                for i in 1..=n + 1 {
                    let y = if i == n + 1 {
                        g.right_limit.clone()
                    } else {
                        let x = lo.clone() + width.clone() * T::from_ratio(i as i64, n as i64 + 1);
                        (g.evaluator)(&x)
                    };
                    if !y.is_finite_value() {
                        out.push(Violation::branch(k, "evaluator returned a non-finite value"));
                        return;
                    }
                    let step_ok = match br.sign {
                        Sign::Plus => y > prev,
                        Sign::Minus => y < prev,
                    };
                    if !step_ok {
                        ok = false;
                        break;
                    }
                    prev = y;
                }
                if !ok {
                    out.push(Violation::branch(k, "not strictly monotone"));
                    return;
                }
            }
        }
        let l = self.endpoint_value(k, true);
        let r = self.endpoint_value(k, false);
        let (ilo, ihi) = if l <= r { (l, r) } else { (r, l) };
        let eps = self.tol.eps_germ;
        let below = ilo < *a && !ilo.near(a, eps);
        let above = ihi > *b && !ihi.near(b, eps);
        if below || above {
            out.push(Violation::branch(k, "image exceeds interval"));
        }
    }

    /// One-sided limit of branch `k` at its left (`true`) or right end.
    pub fn endpoint_value(&self, k: usize, left: bool) -> T {
        let br = &self.branches[k];
        match &br.kind {
            BranchKind::Linear { .. } => br.apply(if left { &self.cuts[k] } else { &self.cuts[k + 1] }),
            BranchKind::Generic(g) => {
                if left {
                    g.left_limit.clone()
                } else {
                    g.right_limit.clone()
                }
            }
        }
    }

    /// Evaluates branch `k` at a point of the closed domain or at a
    /// one-sided endpoint marker.
    pub fn eval_branch(&self, k: usize, x: &BranchPoint<T>) -> Result<T> {
        if k >= self.branches.len() {
            return Err(Error::OutOfDomain(format!("branch index {k}")));
        }
        let (lo, hi) = (&self.cuts[k], &self.cuts[k + 1]);
        match x {
            BranchPoint::LeftEnd => Ok(self.endpoint_value(k, true)),
            BranchPoint::RightEnd => Ok(self.endpoint_value(k, false)),
            BranchPoint::At(x) => {
                if x < lo || x > hi {
                    return Err(Error::OutOfDomain(format!("{x} not in [{lo}, {hi}] of branch {k}")));
                }
                if x == lo {
                    Ok(self.endpoint_value(k, true))
                } else if x == hi {
                    Ok(self.endpoint_value(k, false))
                } else {
                    Ok(self.branches[k].apply(x))
                }
            }
        }
    }

    /// Image interval `f_k(I_k)` as an ordered pair of endpoints.
    pub fn image_bounds(&self, k: usize) -> (T, T) {
        let l = self.endpoint_value(k, true);
        let r = self.endpoint_value(k, false);
        if l <= r { (l, r) } else { (r, l) }
    }

    /// The unique preimage of `y` under branch `k`, or `None` when `y` lies
    /// outside the open image `f_k(I_k)`.
    pub fn inverse_branch(&self, k: usize, y: &T) -> Option<T> {
        let (ilo, ihi) = self.image_bounds(k);
        if *y <= ilo || *y >= ihi {
            return None;
        }
        let br = &self.branches[k];
        let (lo, hi) = (&self.cuts[k], &self.cuts[k + 1]);
        match &br.kind {
            BranchKind::Linear { slope, intercept } => {
                let x = (y.clone() - intercept.clone()) / slope.clone();
                // guard against float rounding pushing the preimage out of the domain
                if x <= *lo || x >= *hi {
                    if T::EXACT {
                        return None;
                    }
                    return Some(if x <= *lo { lo.clone() } else { hi.clone() });
                }
                Some(x)
            }
            BranchKind::Generic(g) => {
                let (mut l, mut h) = (lo.clone(), hi.clone());
                let increasing = br.sign == Sign::Plus;
                for _ in 0..200 {
                    if (h.clone() - l.clone()).as_f64() <= self.tol.eps_inv {
                        break;
                    }
                    let m = l.midpoint(&h);
                    if m <= l || m >= h {
                        break;
                    }
                    let fm = (g.evaluator)(&m);
                    if (fm < *y) == increasing {
                        l = m;
                    } else {
                        h = m;
                    }
                }
                Some(l.midpoint(&h))
            }
        }
    }

    /// Locates `x` in the partition; points within `eps_germ` of a cut
    /// point are reported as that cut point in numeric mode.
    pub fn branch_of_point(&self, x: &T) -> Result<Location> {
        if x <= self.a() || x >= self.b() {
            return Err(Error::OutOfDomain(format!("{x} not in the open interval")));
        }
        let eps = self.tol.eps_germ;
        for (j, c) in self.cuts.iter().enumerate().skip(1).take(self.d()) {
            if x.near(c, eps) {
                return Ok(Location::Cut(j));
            }
        }
        // first cut strictly above x
        let idx = self.cuts.partition_point(|c| c <= x);
        Ok(Location::Branch(idx - 1))
    }

    /// Index `j` with `cuts[j] == x` exactly, if any.
    pub fn cut_index(&self, x: &T) -> Option<usize> {
        self.cuts.iter().position(|c| c == x)
    }

    /// Floating-point copy of the map. Generic evaluators are wrapped
    /// through exact conversion of their arguments.
    pub fn to_numeric(&self) -> MapSpec<f64> {
        let branches = self
            .branches
            .iter()
            .map(|br| {
                let kind = match &br.kind {
                    BranchKind::Linear { slope, intercept } => {
                        BranchKind::Linear { slope: slope.as_f64(), intercept: intercept.as_f64() }
                    }
                    BranchKind::Generic(g) => {
                        let inner = g.evaluator.clone();
                        let evaluator: Evaluator<f64> = Arc::new(move |x: &f64| match T::from_f64(*x) {
                            Some(v) => inner(&v).as_f64(),
                            None => f64::NAN,
                        });
                        BranchKind::Generic(GenericBranch {
                            evaluator,
                            left_limit: g.left_limit.as_f64(),
                            right_limit: g.right_limit.as_f64(),
                        })
                    }
                };
                Branch { kind, sign: br.sign, weight: br.weight.as_f64() }
            })
            .collect();
        MapSpec { cuts: self.cuts.iter().map(Real::as_f64).collect(), branches, tol: self.tol }
    }

    /// Snaps `x` to a cut point within `eps_germ` (numeric mode only).
    pub fn snap(&self, x: T) -> T {
        if T::EXACT {
            return x;
        }
        let eps = self.tol.eps_germ;
        for c in &self.cuts {
            if x.near(c, eps) {
                return c.clone();
            }
        }
        x
    }
}
