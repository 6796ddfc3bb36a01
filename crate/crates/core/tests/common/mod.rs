//! Shared fixtures for the integration tests.

#![allow(dead_code)]

use kneading::{Branch, ExactMap, Rational, Scalar};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Weight range of [`random_markov_map`].
#[derive(Clone, Copy, Debug)]
pub enum Weights {
    /// Rationals in `[3/4, 1]`.
    Positive,
    /// Rationals in `[-2, 2]`, zero allowed.
    Signed,
}

/// A random linear Markov map on `(0, 1)` with `1..=max_d` interior cut
/// points on a grid. Each branch maps its interval onto a union of at least
/// two consecutive pieces (or the whole interval when `d = 0`), with a
/// random orientation.
pub fn random_markov_map(seed: u64, max_d: usize, weights: Weights) -> ExactMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rng.gen_range(1..=max_d);
    let den = *[6i64, 7, 8, 9, 10, 12].choose(&mut rng).unwrap();
    let mut grid: Vec<i64> = (1..den).collect();
    grid.shuffle(&mut rng);
    let mut nums: Vec<i64> = grid[..d].to_vec();
    nums.sort_unstable();
    let cuts: Vec<Rational> = std::iter::once(q(0, 1)).chain(nums.iter().map(|&n| q(n, den))).chain(std::iter::once(q(1, 1))).collect();
    let pieces = d + 1;
    let branches = (0..pieces)
        .map(|k| {
            let i = rng.gen_range(0..pieces - 1);
            let j = rng.gen_range(i + 2..=pieces);
            let (lo, hi) = (cuts[i].clone(), cuts[j].clone());
            let (x0, x1) = (cuts[k].clone(), cuts[k + 1].clone());
            let slope = (hi.clone() - lo.clone()) / (x1.clone() - x0.clone());
            let w = match weights {
                Weights::Positive => q(rng.gen_range(15..=20), 20),
                Weights::Signed => q(rng.gen_range(-8..=8), 4),
            };
            if rng.gen_bool(0.5) {
                Branch::linear(slope.clone(), lo - slope * x0, w)
            } else {
                Branch::linear(-slope.clone(), hi + slope * x0, w)
            }
        })
        .collect();
    ExactMap::new(q(0, 1), q(1, 1), nums.iter().map(|&n| q(n, den)).collect(), branches).expect("generated map is valid")
}
