//! How cycle structure and orbitals behave under powers.

use std::collections::BTreeMap;

use num_integer::Integer;

use crate::dyadic::DyadicMpt;
use crate::group::Group;
use crate::groups::pl::{OrbitalReport, PlOrderAut};
use crate::groups::surrogate::power_cycle_type;
use crate::groups::window::WindowPerm;

/// Elements whose structure under `g ↦ g^N` can be checked.
pub trait PowerInvariance {
    type Report;

    fn power_report(&self, power: usize) -> Self::Report;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MptPowerReport {
    pub min_cycle: usize,
    /// Shortest cycle of `T^N` predicted from the cycles of `T`.
    pub predicted_power_min_cycle: usize,
    /// Shortest cycle of `T^N` computed by composing.
    pub power_min_cycle: usize,
}

impl MptPowerReport {
    pub fn consistent(&self) -> bool {
        self.predicted_power_min_cycle == self.power_min_cycle
    }
}

impl PowerInvariance for DyadicMpt {
    type Report = MptPowerReport;

    fn power_report(&self, power: usize) -> MptPowerReport {
        let cycles = self.cycles();
        let predicted = cycles.iter().map(|c| c.len() / c.len().gcd(&power)).min().unwrap_or(1);
        MptPowerReport {
            min_cycle: cycles.iter().map(Vec::len).min().unwrap_or(1),
            predicted_power_min_cycle: predicted,
            power_min_cycle: self.pow(power as u32).refine(self.level()).min_cycle_len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlPowerReport {
    pub base: OrbitalReport,
    pub power: OrbitalReport,
}

impl PlPowerReport {
    /// Same fixed set, same orbitals, same signs.
    pub fn invariant(&self) -> bool {
        self.base == self.power
    }
}

impl PowerInvariance for PlOrderAut {
    type Report = PlPowerReport;

    fn power_report(&self, power: usize) -> PlPowerReport {
        PlPowerReport { base: self.orbitals(), power: self.pow(power as u32).orbitals() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowPowerReport {
    pub rule: BTreeMap<usize, usize>,
    pub direct: BTreeMap<usize, usize>,
}

impl WindowPowerReport {
    pub fn consistent(&self) -> bool {
        self.rule == self.direct
    }
}

impl PowerInvariance for WindowPerm {
    type Report = WindowPowerReport;

    fn power_report(&self, power: usize) -> WindowPowerReport {
        WindowPowerReport {
            rule: power_cycle_type(self, power),
            direct: self.pow(power as u32).with_window(self.window()).census(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_power_keeps_orbital() {
        let g: PlOrderAut = "piece 1 1".parse().unwrap();
        assert!(g.power_report(3).invariant());
    }

    #[test]
    fn doubling_squared() {
        let g: PlOrderAut = "piece 2 0".parse().unwrap();
        let r = g.power_report(2);
        assert_eq!(g.pow(2), "piece 4 0".parse().unwrap());
        assert!(r.invariant());
    }

    #[test]
    fn odd_power_of_full_cycle() {
        let t = DyadicMpt::shift(5, 1);
        let r = t.power_report(3);
        assert_eq!(r.power_min_cycle, 32);
        assert!(r.consistent());
        assert_eq!(t.pow(3).cycles().len(), 1);
    }

    #[test]
    fn window_rule_matches() {
        let s: WindowPerm = "(0 1 2 3 4 5)(6 7 8)".parse().unwrap();
        assert!(s.power_report(4).consistent());
    }
}
