//! Base isometry groups: permutations of the naturals, piecewise-linear
//! order automorphisms, and the spaces they act on.

pub mod metric;
pub mod pl;
pub mod power;
pub mod space;
pub mod surrogate;
pub mod window;

pub use metric::{GroupMetric, MptMetric, PermMetric};
pub use pl::{Affine, Orbital, OrbitalReport, PlOrderAut, Sign, Span};
pub use power::{MptPowerReport, PlPowerReport, PowerInvariance, WindowPowerReport};
pub use space::{FiniteSpace, IsometrySpace, Naturals};
pub use surrogate::{
    generic_surrogate, match_on_window, match_simultaneous, power_cycle_type, power_surrogate, GenericSurrogate,
    PartialInjection, PowerCycles,
};
pub use window::{perm_metrics, WindowPerm};
