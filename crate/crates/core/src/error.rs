use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree distribution mass is {0}, expected 1")]
    NonUnitMass(f64),
    #[error("degree {degree} has non-positive probability {prob}")]
    NonPositiveProbability { degree: usize, prob: f64 },
    #[error("degree {0} is below 1")]
    DegreeBelowOne(i64),
    #[error("degree distribution is empty")]
    EmptyDistribution,
    #[error("degree {0} listed more than once")]
    DuplicateDegree(usize),
    #[error("unknown preset {0:?} (expected mbms-sec3 or mbms-sec4)")]
    UnknownPreset(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("maximum degree {d_max} exceeds the number of input symbols {k}")]
    DegreeExceedsK { d_max: usize, k: usize },
    #[error("expected {expected} symbols, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("symbols must all be {expected} bytes, found one of {actual}")]
    SymbolSizeMismatch { expected: usize, actual: usize },
    #[error("input symbol {0} is not active")]
    NotActive(usize),
    #[error("input index {index} out of range for k = {k}")]
    InputOutOfRange { index: usize, k: usize },
    #[error("inactivation report does not match graph: {0}")]
    InconsistentReport(String),
    #[error("inactive block has rank {rank}, {needed} needed")]
    RankDeficient { rank: usize, needed: usize },
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("invalid experiment plan: {0}")]
    InvalidPlan(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
