use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dyadic::set::{DyadicPartition, DyadicSet};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::rational::{dyadic, GeometricSum, Q};

/// Measure-preserving map of `[0,1)` permuting the `2^level` dyadic intervals
/// by translation.
///
/// Equality compares the induced point maps, so the same map at two levels is
/// equal.
#[derive(Debug, Clone)]
pub struct DyadicMpt {
    level: u32,
    perm: Vec<u32>,
}

/// One cycle of the interval permutation, starting at its smallest index.
pub type Cycle = Vec<usize>;

impl DyadicMpt {
    pub fn new(level: u32, perm: Vec<u32>) -> Result<Self> {
        let n = 1usize << level;
        if perm.len() != n {
            return Err(Error::NotBijection(format!("expected {n} images at level {level}, got {}", perm.len())));
        }
        let mut seen = vec![false; n];
        for &p in &perm {
            let p = p as usize;
            if p >= n || seen[p] {
                return Err(Error::NotBijection(format!("image {p} repeated or out of range")));
            }
            seen[p] = true;
        }
        Ok(Self { level, perm })
    }

    pub(crate) fn from_perm_unchecked(level: u32, perm: Vec<u32>) -> Self {
        debug_assert_eq!(perm.len(), 1usize << level);
        Self { level, perm }
    }

    pub fn identity_at(level: u32) -> Self {
        Self { level, perm: (0..1u32 << level).collect() }
    }

    /// `i ↦ i + k mod 2^level`.
    pub fn shift(level: u32, k: i64) -> Self {
        let n = 1i64 << level;
        Self { level, perm: (0..n).map(|i| (i + k).rem_euclid(n) as u32).collect() }
    }

    /// Map whose interval permutation has the given cycles (others fixed).
    pub fn from_cycles(level: u32, cycles: &[Vec<usize>]) -> Result<Self> {
        let n = 1usize << level;
        let mut perm: Vec<u32> = (0..n as u32).collect();
        let mut used = vec![false; n];
        for c in cycles {
            for (k, &i) in c.iter().enumerate() {
                if i >= n || used[i] {
                    return Err(Error::NotBijection(format!("cycle entry {i} invalid")));
                }
                used[i] = true;
                perm[i] = c[(k + 1) % c.len()] as u32;
            }
        }
        Ok(Self { level, perm })
    }

    /// Uniformly random single cycle through every interval.
    pub fn random_full_cycle<R: Rng + ?Sized>(level: u32, rng: &mut R) -> Self {
        let n = 1usize << level;
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self::from_cycles(level, &[order]).expect("a shuffled cycle is a bijection")
    }

    pub fn random<R: Rng + ?Sized>(level: u32, rng: &mut R) -> Self {
        let mut perm: Vec<u32> = (0..1u32 << level).collect();
        perm.shuffle(rng);
        Self { level, perm }
    }

    /// Random map whose cycles have the given lengths (summing to `2^level`).
    pub fn random_with_cycle_lengths<R: Rng + ?Sized>(level: u32, lengths: &[usize], rng: &mut R) -> Result<Self> {
        let n = 1usize << level;
        if lengths.iter().sum::<usize>() != n || lengths.contains(&0) {
            return Err(Error::Invalid(format!("cycle lengths must be positive and sum to {n}")));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut cycles = Vec::new();
        let mut start = 0;
        for &l in lengths {
            cycles.push(order[start..start + l].to_vec());
            start += l;
        }
        Self::from_cycles(level, &cycles)
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn perm(&self) -> &[u32] {
        &self.perm
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.perm[i] as usize
    }

    /// Same point map at level `m ≥ level`.
    pub fn refine(&self, m: u32) -> Self {
        assert!(m >= self.level, "cannot refine level {} to {m}", self.level);
        if m == self.level {
            return self.clone();
        }
        let f = 1usize << (m - self.level);
        let mut perm = Vec::with_capacity(self.perm.len() * f);
        for &p in &self.perm {
            let base = p as usize * f;
            perm.extend((0..f).map(|j| (base + j) as u32));
        }
        Self { level: m, perm }
    }

    pub fn at_level(&self, m: u32) -> std::borrow::Cow<'_, Self> {
        if m == self.level {
            std::borrow::Cow::Borrowed(self)
        } else {
            std::borrow::Cow::Owned(self.refine(m))
        }
    }

    /// `self ∘ rhs`, at the common level.
    pub fn compose(&self, rhs: &Self) -> Self {
        let m = self.level.max(rhs.level);
        let a = self.at_level(m);
        let b = rhs.at_level(m);
        Self { level: m, perm: b.perm.iter().map(|&i| a.perm[i as usize]).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.perm.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            inv[p as usize] = i as u32;
        }
        Self { level: self.level, perm: inv }
    }

    /// Coarsest level at which this map is still a translation of intervals.
    pub fn coarsen(&self) -> Self {
        let mut cur = self.clone();
        while cur.level > 0 {
            let half: Option<Vec<u32>> =
                cur.perm.chunks(2).map(|c| (c[0] % 2 == 0 && c[1] == c[0] + 1).then_some(c[0] / 2)).collect();
            match half {
                Some(p) => cur = Self { level: cur.level - 1, perm: p },
                None => break,
            }
        }
        cur
    }

    /// Image of a dyadic set.
    pub fn image(&self, set: &DyadicSet) -> DyadicSet {
        let m = self.level.max(set.level());
        let t = self.at_level(m);
        let s = set.refine(m);
        DyadicSet::new(m, s.members().iter().map(|&i| t.apply(i))).expect("in range")
    }

    /// Cycle decomposition, each cycle starting at its smallest index, sorted
    /// by that index.
    pub fn cycles(&self) -> Vec<Cycle> {
        let n = self.perm.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut c = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                c.push(i);
                i = self.perm[i] as usize;
            }
            out.push(c);
        }
        out
    }

    /// Measure of the period-k part `B_k` for every occurring k.
    pub fn cycle_profile(&self) -> BTreeMap<usize, Q> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for c in self.cycles() {
            *counts.entry(c.len()).or_default() += c.len();
        }
        counts.into_iter().map(|(k, c)| (k, dyadic(c, self.level))).collect()
    }

    pub fn min_cycle_len(&self) -> usize {
        self.cycles().iter().map(Vec::len).min().unwrap_or(1)
    }

    /// All cycles have length at least `n`.
    pub fn is_n_aperiodic(&self, n: usize) -> bool {
        self.min_cycle_len() >= n
    }

    pub fn fixed_set(&self) -> DyadicSet {
        DyadicSet::new(self.level, (0..self.len()).filter(|&i| self.apply(i) == i)).expect("in range")
    }

    /// `Δᵤ(T,R) = μ{T ≠ R}`.
    pub fn delta_u(&self, other: &Self) -> Q {
        let m = self.level.max(other.level);
        let a = self.at_level(m);
        let b = other.at_level(m);
        let diff = a.perm.iter().zip(&b.perm).filter(|(x, y)| x != y).count();
        dyadic(diff, m)
    }

    /// `sup_A μ(T(A) △ R(A))`.
    ///
    /// The supremum is attained on unions of intervals; by invariance it
    /// equals `max_A |A △ P(A)|` for `P = T⁻¹R`, which is `c` on every
    /// even cycle of `P` and `c − 1` on every odd cycle of length `c ≥ 3`.
    pub fn delta_u_sup(&self, other: &Self) -> Q {
        let p = self.inverse().compose(other);
        let total: usize = p
            .cycles()
            .iter()
            .map(|c| match c.len() {
                1 => 0,
                l if l % 2 == 0 => l,
                l => l - 1,
            })
            .sum();
        dyadic(total, p.level)
    }

    /// Weak-topology metric `Σ_m 2^-(m+1) μ(T(B_m) △ R(B_m))` over the dyadic
    /// intervals `B_m` of levels `0..=n` listed level by level, where `n` is
    /// the coarsest level representing both maps.
    pub fn delta_w(&self, other: &Self) -> Q {
        let (a, b) = (self.coarsen(), other.coarsen());
        let m = a.level.max(b.level);
        let a = a.refine(m);
        let b = b.refine(m);
        let n = a.perm.len();
        let mut mark = vec![0u32; n];
        let mut stamp = 0u32;
        let mut acc = GeometricSum::new();
        for k in 0..=m {
            let width = 1usize << (m - k);
            for j in 0..(1usize << k) {
                stamp += 1;
                for i in j * width..(j + 1) * width {
                    mark[a.apply(i)] = stamp;
                }
                let common = (j * width..(j + 1) * width).filter(|&i| mark[b.apply(i)] == stamp).count();
                acc.push(dyadic(2 * (width - common), m));
            }
        }
        acc.total()
    }

    pub fn partition(&self) -> DyadicPartition {
        DyadicPartition::new(self.level)
    }
}

impl PartialEq for DyadicMpt {
    fn eq(&self, other: &Self) -> bool {
        let m = self.level.max(other.level);
        self.at_level(m).perm == other.at_level(m).perm
    }
}

impl Eq for DyadicMpt {}

impl Group for DyadicMpt {
    fn identity() -> Self {
        Self::identity_at(0)
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.compose(rhs)
    }

    fn inv(&self) -> Self {
        self.inverse()
    }

    fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p as usize)
    }
}

impl fmt::Display for DyadicMpt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "mpt {}", self.level)?;
        for p in &self.perm {
            write!(f, " {p}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio, zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn compose_with_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = DyadicMpt::random(4, &mut rng);
        assert!(t.compose(&t.inverse()).is_identity());
        assert_eq!(t.compose(&t.inverse()).level(), 4);
    }

    #[test]
    fn refine_identity() {
        let r = DyadicMpt::identity_at(1).refine(3);
        assert_eq!(r, DyadicMpt::identity_at(3));
        assert_eq!(r.level(), 3);
        assert_eq!(r.perm().len(), 8);
    }

    #[test]
    fn shifts_compose() {
        let s1 = DyadicMpt::shift(2, 1);
        assert_eq!(s1.compose(&s1), DyadicMpt::shift(2, 2));
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(DyadicMpt::new(1, vec![0, 0]).is_err());
        assert!(DyadicMpt::new(1, vec![0]).is_err());
        assert!(DyadicMpt::new(1, vec![0, 2]).is_err());
    }

    #[test]
    fn cycles_of_shift_and_identity() {
        let s = DyadicMpt::shift(3, 1);
        assert_eq!(s.cycles().len(), 1);
        assert_eq!(s.cycles()[0].len(), 8);
        assert!(s.is_n_aperiodic(8) && !s.is_n_aperiodic(9));
        assert_eq!(DyadicMpt::identity_at(3).cycles().len(), 8);
    }

    #[test]
    fn cycle_profile_against_point_iteration() {
        // (0 1)(2 3 4 5) with 6 and 7 fixed.
        let t = DyadicMpt::from_cycles(3, &[vec![0, 1], vec![2, 3, 4, 5]]).unwrap();
        let profile = t.cycle_profile();
        // oracle: iterate each interval until it returns
        let mut period_mass: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..8 {
            let mut j = t.apply(i);
            let mut p = 1;
            while j != i {
                j = t.apply(j);
                p += 1;
            }
            *period_mass.entry(p).or_default() += 1;
        }
        for (k, c) in period_mass {
            assert_eq!(profile[&k], dyadic(c, 3));
        }
        assert_eq!(profile[&2], ratio(2, 8));
        assert_eq!(profile[&4], ratio(4, 8));
    }

    #[test]
    fn delta_u_examples() {
        let s = DyadicMpt::shift(2, 1);
        assert_eq!(s.delta_u(&s), zero());
        assert_eq!(s.delta_u(&DyadicMpt::identity()), one());
        let swap = DyadicMpt::from_cycles(2, &[vec![0, 1]]).unwrap();
        assert_eq!(swap.delta_u(&DyadicMpt::identity()), ratio(1, 2));
    }

    fn sup_by_exhaustion(t: &DyadicMpt, r: &DyadicMpt) -> Q {
        let m = t.level().max(r.level());
        let n = 1usize << m;
        (0u32..1 << n)
            .map(|mask| {
                let a = DyadicSet::new(m, (0..n).filter(|i| mask >> i & 1 == 1)).unwrap();
                t.image(&a).symmetric_difference(&r.image(&a)).measure()
            })
            .max()
            .unwrap()
    }

    #[test]
    fn delta_u_sup_matches_exhaustive_search() {
        let s = DyadicMpt::shift(2, 1);
        let id = DyadicMpt::identity();
        assert_eq!(s.delta_u_sup(&id), sup_by_exhaustion(&s, &id));
        assert_eq!(s.delta_u_sup(&id), one());
        let three = DyadicMpt::from_cycles(2, &[vec![0, 1, 2]]).unwrap();
        assert_eq!(three.delta_u_sup(&id), ratio(1, 2));
        assert_eq!(sup_by_exhaustion(&three, &id), ratio(1, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = DyadicMpt::random(3, &mut rng);
            let b = DyadicMpt::random(2, &mut rng);
            assert_eq!(a.delta_u_sup(&b), sup_by_exhaustion(&a, &b));
        }
    }

    #[test]
    fn delta_w_bounded_by_delta_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let lv = rng.gen_range(0..6);
            let a = DyadicMpt::random(lv, &mut rng);
            let b = DyadicMpt::random(rng.gen_range(0..6), &mut rng);
            let w = a.delta_w(&b);
            assert!(w <= a.delta_u(&b));
            assert!(a.delta_u_sup(&b) <= a.delta_u(&b));
            assert_eq!(a.delta_w(&a), zero());
        }
    }

    #[test]
    fn refinement_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DyadicMpt::random(3, &mut rng);
        let b = DyadicMpt::random(3, &mut rng);
        let (ar, br) = (a.refine(5), b.refine(5));
        assert_eq!(a.delta_u(&b), ar.delta_u(&br));
        assert_eq!(a.delta_u_sup(&b), ar.delta_u_sup(&br));
        assert_eq!(a.cycle_profile(), ar.cycle_profile());
        assert_eq!(ar.coarsen().level(), a.coarsen().level());
    }
}
