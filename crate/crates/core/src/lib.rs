//! Exact finite-resolution computations with isometry groups of
//! randomizations over dyadic interval permutations.

pub mod dyadic;
pub mod error;
pub mod group;
pub mod groups;
pub mod l0;
pub mod rational;
pub mod rokhlin;
pub mod text;
pub mod tilde;

pub use error::{Error, Result};
pub use group::Group;
