use thiserror::Error;

use crate::dem::DetectorId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("code distance must be odd and at least 3, got {0}")]
    InvalidDistance(usize),
    #[error("number of rounds must be at least 1")]
    InvalidRounds,
    #[error("detector lag must be 1 or 2, got {0}")]
    InvalidLag(usize),
    #[error("probability {p} out of range for {what}")]
    ProbabilityOutOfRange { what: String, p: f64 },
    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("detector {0:?} is outside the model")]
    UnknownDetector(DetectorId),
    #[error("invalid edge: {0}")]
    InvalidEdge(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("rows are not contiguous: expected round {expected}, got {got}")]
    NonContiguous { expected: usize, got: usize },
    #[error("row has {got} entries, expected {expected}")]
    RowWidth { expected: usize, got: usize },
    #[error("not enough samples: class {class} has {n}, need at least {min}")]
    InsufficientSamples { class: String, n: u64, min: u64 },
    #[error("degenerate denominator {0:e} in probability inversion")]
    DegenerateDenominator(f64),
    #[error("degenerate neighbour product {0:e} in boundary inversion")]
    DegenerateProduct(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix dimension {dim} exceeds cap {cap}")]
    CapExceeded { dim: usize, cap: usize },
    #[error("the matrix 1 - A is singular")]
    Singular,
    #[error("walk series did not converge after {0} steps")]
    NoConvergence(usize),
    #[error("no perfect matching exists for the given weights")]
    Infeasible,
    #[error("weight table has no entry for detector {0:?}")]
    MissingWeight(DetectorId),
    #[error("decoder is at chance level: all fidelities are at or below 1/2")]
    AtChance,
    #[error("invalid configuration: {0}")]
    Config(String),
}
