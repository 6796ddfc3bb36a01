use std::fmt;

use thiserror::Error;

/// A single failed invariant found while validating a map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Branch index (0-based) when the violation concerns one branch.
    pub branch: Option<usize>,
    pub reason: String,
}

impl Violation {
    pub fn global(reason: impl Into<String>) -> Self {
        Self { branch: None, reason: reason.into() }
    }

    pub fn branch(branch: usize, reason: impl Into<String>) -> Self {
        Self { branch: Some(branch), reason: reason.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.branch {
            Some(k) => write!(f, "branch {k}: {}", self.reason),
            None => f.write_str(&self.reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid map: {}", join(.0))]
    InvalidMap(Vec<Violation>),

    #[error("numeric ambiguity: {0}")]
    NumericAmbiguity(String),

    #[error("out of domain: {0}")]
    OutOfDomain(String),

    #[error("sigma is undefined when evaluated at its own jump")]
    UndefinedSigma,

    #[error("no cycle found for germ {germ} within {steps} steps")]
    NoCycle { germ: String, steps: usize },

    #[error("germ closure exceeds {limit} elements")]
    TooLarge { limit: usize },

    #[error("germ {0} is not available")]
    MissingGerm(String),

    #[error("series diverges: |t|*G = {0} >= 1")]
    Divergent(f64),

    #[error("no zero of the determinant inside the convergence disk")]
    NoPeripheralZero,

    #[error("a zero lies within tolerance of the contour |t| = {0}")]
    ContourTooClose(f64),

    #[error("1 - tS is singular on the carrier")]
    SingularResolvent,

    #[error("map is not Markov: branch {branch} endpoint image {image} is not a cut point")]
    NotMarkov { branch: usize, image: String },

    #[error("weight of branch {0} must be real and non-negative")]
    NegativeWeight(usize),

    #[error("segments overlap at {0}")]
    OverlappingSegments(String),

    #[error("segments leave a gap at {0}")]
    GapInPartition(String),

    #[error("{path}: {message}")]
    Config { path: String, message: String },

    #[error("{0}")]
    Usage(String),
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

impl Error {
    /// Stable machine-readable code used in structured outputs.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidMap(_) => "InvalidMap",
            Error::NumericAmbiguity(_) => "NumericAmbiguity",
            Error::OutOfDomain(_) => "OutOfDomain",
            Error::UndefinedSigma => "UndefinedSigma",
            Error::NoCycle { .. } => "NoCycle",
            Error::TooLarge { .. } => "TooLarge",
            Error::MissingGerm(_) => "MissingGerm",
            Error::Divergent(_) => "Divergent",
            Error::NoPeripheralZero => "NoPeripheralZero",
            Error::ContourTooClose(_) => "ContourTooClose",
            Error::SingularResolvent => "SingularResolvent",
            Error::NotMarkov { .. } => "NotMarkov",
            Error::NegativeWeight(_) => "NegativeWeight",
            Error::OverlappingSegments(_) => "OverlappingSegments",
            Error::GapInPartition(_) => "GapInPartition",
            Error::Config { .. } => "Config",
            Error::Usage(_) => "Usage",
        }
    }

    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config { path: path.into(), message: message.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
