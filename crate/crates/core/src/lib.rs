//! Kneading determinants and transfer operators of piecewise monotone
//! interval maps.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod germ;
pub mod kneading;
pub mod linalg;
pub mod map;
pub mod oracle;
pub mod poly;
pub mod ratfunc;
pub mod scalar;
pub mod series;
pub mod spectral;
pub mod stepfunc;

pub use error::{Error, Result};
pub use scalar::{Rational, Real, Scalar};

pub use germ::PointGerm;
pub use map::{Branch, MapSpec};
pub use stepfunc::StepFunction;

/// Map with exact rational coefficients and weights.
pub type ExactMap = MapSpec<Rational>;
/// Map with `f64` coefficients and weights.
pub type NumericMap = MapSpec<f64>;
pub type ExactGerm = PointGerm<Rational>;
pub type NumericGerm = PointGerm<f64>;
pub type ExactStepFunction = StepFunction<Rational>;
pub type NumericStepFunction = StepFunction<f64>;
/// Kneading determinant as an exact rational function of `t`.
pub type ExactDeterminant = ratfunc::RationalFunction<Rational>;
