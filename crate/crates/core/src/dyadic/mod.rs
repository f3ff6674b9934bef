//! Dyadic interval permutations and their towers.

pub mod conjugacy;
pub mod mpt;
pub mod set;
pub mod tower;

pub use conjugacy::{match_cycle_type, mpt_conjugate_match, ConjugateMatch};
pub use mpt::{Cycle, DyadicMpt};
pub use set::{DyadicPartition, DyadicSet};
pub use tower::{periodic_approximation, rokhlin_tower, ExactTower, PeriodicApproximation, TowerData};
