//! A small catalog of reference maps used by tests, examples and the CLI.

use crate::map::{Branch, MapSpec};
use crate::scalar::Real;

fn r<T: Real>(n: i64, d: i64) -> T {
    T::from_ratio(n, d)
}

/// `x -> 2x` on `(0, 1/2)` and `x -> x - 1/2` on `(1/2, 1)`, unit weights.
/// Its topological entropy is the log of the golden mean.
pub fn golden_map<T: Real>() -> MapSpec<T> {
    weighted_golden_map(T::one(), T::one())
}

pub fn weighted_golden_map<T: Real>(g0: T, g1: T) -> MapSpec<T> {
    MapSpec::new(
        r(0, 1),
        r(1, 1),
        vec![r(1, 2)],
        vec![Branch::linear(r(2, 1), r(0, 1), g0), Branch::linear(r(1, 1), r(-1, 2), g1)],
    )
    .expect("golden map is valid")
}

/// Full tent map `2x`, `2 - 2x`, unit weights.
pub fn tent_map<T: Real>() -> MapSpec<T> {
    MapSpec::new(
        r(0, 1),
        r(1, 1),
        vec![r(1, 2)],
        vec![Branch::linear(r(2, 1), r(0, 1), T::one()), Branch::linear(r(-2, 1), r(2, 1), T::one())],
    )
    .expect("tent map is valid")
}

/// Single increasing full branch `x -> x` on `(0, 1)`.
pub fn identity_map<T: Real>() -> MapSpec<T> {
    full_branch_map(T::one())
}

pub fn full_branch_map<T: Real>(weight: T) -> MapSpec<T> {
    MapSpec::new(r(0, 1), r(1, 1), vec![], vec![Branch::linear(r(1, 1), r(0, 1), weight)]).expect("identity map is valid")
}

/// Orientation reversing `x -> 1 - x` on `(0, 1)`.
pub fn flip_map<T: Real>() -> MapSpec<T> {
    MapSpec::new(r(0, 1), r(1, 1), vec![], vec![Branch::linear(r(-1, 1), r(1, 1), T::one())]).expect("flip map is valid")
}

/// Two disjoint invariant copies of [`golden_map`] on `(0, 1)` and `(1, 2)`.
/// Every eigenvalue of the transfer operator doubles, so the determinant
/// has a double zero at the inverse golden mean.
pub fn twin_golden_map<T: Real>() -> MapSpec<T> {
    MapSpec::new(
        r(0, 1),
        r(2, 1),
        vec![r(1, 2), r(1, 1), r(3, 2)],
        vec![
            Branch::linear(r(2, 1), r(0, 1), T::one()),
            Branch::linear(r(1, 1), r(-1, 2), T::one()),
            Branch::linear(r(2, 1), r(-1, 1), T::one()),
            Branch::linear(r(1, 1), r(-1, 2), T::one()),
        ],
    )
    .expect("twin golden map is valid")
}

/// Beta transformation `x -> beta x mod 1` with two branches, `1 < beta < 2`.
pub fn beta_map(beta: f64) -> MapSpec<f64> {
    let c = 1.0 / beta;
    MapSpec::new(0.0, 1.0, vec![c], vec![Branch::linear(beta, 0.0, 1.0), Branch::linear(beta, -1.0, 1.0)])
        .expect("beta map is valid")
}

/// Beta map for `beta = pi / 2`, whose critical orbit never repeats.
pub fn irrational_rotation_like() -> MapSpec<f64> {
    beta_map(std::f64::consts::FRAC_PI_2)
}
