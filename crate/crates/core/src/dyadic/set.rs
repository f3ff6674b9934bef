use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::{dyadic, Q};

/// Partition of `[0,1)` into `2^level` half-open intervals of equal length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicPartition {
    pub level: u32,
}

impl DyadicPartition {
    pub fn new(level: u32) -> Self {
        Self { level }
    }

    pub fn len(&self) -> usize {
        1usize << self.level
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Endpoints of interval `i` as exact rationals.
    pub fn interval(&self, i: usize) -> (Q, Q) {
        (dyadic(i, self.level), dyadic(i + 1, self.level))
    }

    /// Indices at level `m` covering interval `i` of this partition.
    pub fn children(&self, i: usize, m: u32) -> std::ops::Range<usize> {
        assert!(m >= self.level, "refinement must not coarsen");
        let f = 1usize << (m - self.level);
        f * i..f * (i + 1)
    }
}

/// A union of dyadic intervals at a fixed level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicSet {
    level: u32,
    members: BTreeSet<usize>,
}

impl DyadicSet {
    pub fn new<I: IntoIterator<Item = usize>>(level: u32, members: I) -> Result<Self> {
        let n = 1usize << level;
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&i| i >= n) {
            return Err(Error::Invalid(format!("interval {bad} out of range at level {level}")));
        }
        Ok(Self { level, members })
    }

    pub fn empty(level: u32) -> Self {
        Self { level, members: BTreeSet::new() }
    }

    pub fn full(level: u32) -> Self {
        Self { level, members: (0..1usize << level).collect() }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn members(&self) -> &BTreeSet<usize> {
        &self.members
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }

    pub fn count(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn measure(&self) -> Q {
        dyadic(self.members.len(), self.level)
    }

    pub fn refine(&self, m: u32) -> Self {
        let p = DyadicPartition::new(self.level);
        Self { level: m, members: self.members.iter().flat_map(|&i| p.children(i, m)).collect() }
    }

    pub fn complement(&self) -> Self {
        Self { level: self.level, members: (0..1usize << self.level).filter(|i| !self.members.contains(i)).collect() }
    }

    fn aligned(&self, other: &Self) -> (Self, Self) {
        let m = self.level.max(other.level);
        (self.refine(m), other.refine(m))
    }

    pub fn union(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self { level: a.level, members: a.members.union(&b.members).copied().collect() }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self { level: a.level, members: a.members.intersection(&b.members).copied().collect() }
    }

    pub fn symmetric_difference(&self, other: &Self) -> Self {
        let (a, b) = self.aligned(other);
        Self { level: a.level, members: a.members.symmetric_difference(&b.members).copied().collect() }
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection(other).is_empty()
    }
}

impl fmt::Display for DyadicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "set {}", self.level)?;
        for i in &self.members {
            write!(f, " {i}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn refinement_preserves_measure() {
        let s = DyadicSet::new(2, [0, 3]).unwrap();
        assert_eq!(s.measure(), ratio(1, 2));
        let r = s.refine(4);
        assert_eq!(r.count(), 8);
        assert_eq!(r.measure(), ratio(1, 2));
        assert!(r.contains(15) && r.contains(0) && !r.contains(4));
    }

    #[test]
    fn set_algebra_across_levels() {
        let a = DyadicSet::new(1, [0]).unwrap();
        let b = DyadicSet::new(2, [1, 2]).unwrap();
        assert_eq!(a.symmetric_difference(&b).measure(), ratio(1, 2));
        assert_eq!(a.union(&b).measure(), ratio(3, 4));
        assert_eq!(a.complement().measure(), ratio(1, 2));
        assert!(DyadicSet::new(1, [2]).is_err());
    }

    #[test]
    fn children_ranges() {
        let p = DyadicPartition::new(1);
        assert_eq!(p.children(1, 3), 4..8);
        assert_eq!(p.interval(1), (ratio(1, 2), ratio(1, 1)));
    }
}
