use std::collections::BTreeMap;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("not a bijection: {0}")]
    NotBijection(String),

    #[error("map has a cycle of length {shortest} < required height {required}")]
    NotAperiodic { shortest: usize, required: usize },

    #[error("tower leftover {leftover} exceeds tolerance {tolerance}")]
    TowerTooCoarse { leftover: String, tolerance: String },

    #[error("leftover of {count} intervals is not divisible by {height} within level {max_level}")]
    LeftoverIndivisible { count: usize, height: usize, max_level: u32 },

    #[error("not enough cycles in the power of the surrogate; needed census {needed:?}")]
    InsufficientCycles { needed: BTreeMap<usize, usize> },

    #[error("target is not injective at {0}")]
    NotInjective(u32),

    #[error("values live in different spaces: {0}")]
    MismatchedSpace(String),

    #[error("sequence does not converge: {0}")]
    NotConverging(String),

    #[error("interval {interval} has no conjugator within tolerance")]
    Unmatchable { interval: usize },

    #[error("base metric is not discrete")]
    NotDiscrete,

    #[error("space has no two points at positive distance")]
    DegenerateSpace,

    #[error("tower is not exact: {0}")]
    NotExactTower(String),

    #[error("matching oracle failed ({component}): {reason}")]
    OracleFailure { component: String, reason: String },

    #[error("simultaneous matching not supported: {0}")]
    SimultaneousMatchUnsupported(String),

    #[error("achieved {achieved} does not meet tolerance {tolerance}")]
    ToleranceNotMet { achieved: String, tolerance: String },

    #[error("invalid argument: {0}")]
    Invalid(String),
}
