//! Finite surrogates of a generic permutation and conjugacy matching of its
//! powers.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::groups::window::WindowPerm;

/// A window permutation holding `copies` disjoint cycles of every length
/// `1..=max_len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericSurrogate {
    pub max_len: usize,
    pub copies: usize,
    pub realized: WindowPerm,
}

/// Packs `copies` consecutive cycles of each length `1..=max_len` in
/// increasing order of length into the window `copies·L(L+1)/2`.
pub fn generic_surrogate(max_len: usize, copies: usize) -> Result<GenericSurrogate> {
    if max_len == 0 || copies == 0 {
        return Err(Error::Invalid("cycle budget must be positive".into()));
    }
    let window = copies * max_len * (max_len + 1) / 2;
    let mut map = Vec::with_capacity(window);
    for len in 1..=max_len {
        for _ in 0..copies {
            let start = map.len() as u32;
            map.extend((0..len as u32).map(|k| start + (k + 1) % len as u32));
        }
    }
    Ok(GenericSurrogate { max_len, copies, realized: WindowPerm::from_map_unchecked(map) })
}

/// The part of a generic permutation that matters for targets of up to
/// `max_len` points under the `N`-th power: `copies` cycles of each length
/// `c·N` for `c` in `1..=max_len`, so `σ^N` holds `copies·N` cycles of every
/// length up to `max_len`.
pub fn power_surrogate(max_len: usize, power: usize, copies: usize) -> Result<WindowPerm> {
    if max_len == 0 || power == 0 || copies == 0 {
        return Err(Error::Invalid("cycle budget must be positive".into()));
    }
    let mut map = Vec::with_capacity(copies * power * max_len * (max_len + 1) / 2);
    for c in 1..=max_len {
        let len = (c * power) as u32;
        for _ in 0..copies {
            let start = map.len() as u32;
            map.extend((0..len).map(|k| start + (k + 1) % len));
        }
    }
    Ok(WindowPerm::from_map_unchecked(map))
}

/// Cycle census of `σ^N` from the census of `σ`: a `k`-cycle splits into
/// `gcd(k, N)` cycles of length `k / gcd(k, N)`.
pub fn power_cycle_type(sigma: &WindowPerm, power: usize) -> BTreeMap<usize, usize> {
    assert!(power >= 1, "power must be positive");
    let mut out = BTreeMap::new();
    for (k, count) in sigma.census() {
        let g = k.gcd(&power);
        *out.entry(k / g).or_default() += g * count;
    }
    out
}

/// A finite partial injection `n ↦ target(n)` on the naturals.
pub type PartialInjection = BTreeMap<u32, u32>;

/// The cycles of `σ^N` grouped by length, ready for repeated matching.
#[derive(Debug, Clone)]
pub struct PowerCycles {
    power: WindowPerm,
    by_len: BTreeMap<usize, Vec<Vec<u32>>>,
}

/// Closed cycles and open chains of a partial injection's graph.
#[derive(Debug, Default)]
struct Pieces {
    closed: Vec<Vec<u32>>,
    chains: Vec<Vec<u32>>,
}

fn decompose(target: &PartialInjection) -> Result<Pieces> {
    let mut images = BTreeSet::new();
    for &v in target.values() {
        if !images.insert(v) {
            return Err(Error::NotInjective(v));
        }
    }
    let mut pieces = Pieces::default();
    let mut done = BTreeSet::new();
    for &start in target.keys().filter(|k| !images.contains(k)) {
        let mut chain = vec![start];
        let mut at = start;
        while let Some(&next) = target.get(&at) {
            chain.push(next);
            at = next;
        }
        done.extend(chain.iter().copied());
        pieces.chains.push(chain);
    }
    for &start in target.keys() {
        if done.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        let mut at = target[&start];
        while at != start {
            cycle.push(at);
            at = target[&at];
        }
        done.extend(cycle.iter().copied());
        pieces.closed.push(cycle);
    }
    Ok(pieces)
}

impl PowerCycles {
    pub fn new(sigma: &WindowPerm, power: usize) -> Self {
        Self::from_power(sigma.pow(power as u32).with_window(sigma.window()))
    }

    pub fn from_power(power: WindowPerm) -> Self {
        let mut by_len: BTreeMap<usize, Vec<Vec<u32>>> = BTreeMap::new();
        for c in power.cycles() {
            by_len.entry(c.len()).or_default().push(c);
        }
        Self { power, by_len }
    }

    pub fn power(&self) -> &WindowPerm {
        &self.power
    }

    pub fn census(&self) -> BTreeMap<usize, usize> {
        self.by_len.iter().map(|(&k, v)| (k, v.len())).collect()
    }

    /// Finds `ρ` with `ρ⁻¹ σ^N ρ (n) = target(n)` wherever `target` is
    /// defined.
    ///
    /// Closed `c`-cycles of the target go into unused `c`-cycles of `σ^N`
    /// (fixed points may also use points past the window); chains of `m`
    /// points go into the shortest unused cycle of length at least `m`.
    /// Among equal lengths the cycle with the smallest start is taken. `ρ` is
    /// completed by pairing the remaining points in increasing order.
    pub fn match_target(&self, target: &PartialInjection) -> Result<WindowPerm> {
        let bound = target.keys().chain(target.values()).map(|&v| v + 1).max().unwrap_or(0);
        let fresh = (self.power.window() as u32).max(bound);
        let (assign, _) = self.assign(target, fresh)?;
        let rho = complete(&assign);
        verify_match(&self.power, &rho, target)?;
        Ok(rho)
    }

    /// Drops the fixed points inside the window, so fixed targets are sent
    /// past the window instead.
    fn without_fixed(mut self) -> Self {
        self.by_len.remove(&1);
        self
    }

    /// Images of the target's points; fixed points past the window are drawn
    /// upward from `fresh`. Returns the assignment and the next fresh point.
    fn assign(&self, target: &PartialInjection, mut fresh: u32) -> Result<(BTreeMap<u32, u32>, u32)> {
        let pieces = decompose(target)?;
        let mut next_free: BTreeMap<usize, usize> = BTreeMap::new();
        let mut missing: BTreeMap<usize, usize> = BTreeMap::new();
        let mut assign: BTreeMap<u32, u32> = BTreeMap::new();

        let mut closed = pieces.closed;
        closed.sort_by_key(|c| (c.len(), c[0]));
        for cycle in &closed {
            let c = cycle.len();
            let avail = self.by_len.get(&c).map_or(0, Vec::len);
            let used = next_free.entry(c).or_default();
            if *used < avail {
                let host = &self.by_len[&c][*used];
                *used += 1;
                for (&x, &y) in cycle.iter().zip(host) {
                    assign.insert(x, y);
                }
            } else if c == 1 {
                assign.insert(cycle[0], fresh);
                fresh += 1;
            } else {
                *missing.entry(c).or_default() += 1;
            }
        }

        let mut chains = pieces.chains;
        chains.sort_by_key(|c| (std::cmp::Reverse(c.len()), c[0]));
        for chain in &chains {
            let need = chain.len();
            let host = self.by_len.range(need..).find_map(|(&len, list)| {
                let used = next_free.get(&len).copied().unwrap_or(0);
                (used < list.len()).then_some(len)
            });
            match host {
                Some(len) => {
                    let used = next_free.entry(len).or_default();
                    let host = &self.by_len[&len][*used];
                    *used += 1;
                    for (&x, &y) in chain.iter().zip(host) {
                        assign.insert(x, y);
                    }
                }
                None => *missing.entry(need).or_default() += 1,
            }
        }
        if !missing.is_empty() {
            return Err(Error::InsufficientCycles { needed: missing });
        }

        Ok((assign, fresh))
    }
}

fn verify_match(power: &WindowPerm, rho: &WindowPerm, target: &PartialInjection) -> Result<()> {
    let inv = rho.inverse();
    for (&n, &t) in target {
        let got = inv.apply(power.apply(rho.apply(n)));
        if got != t {
            return Err(Error::OracleFailure {
                component: "match_on_window".into(),
                reason: format!("conjugate sends {n} to {got}, expected {t}"),
            });
        }
    }
    Ok(())
}

/// Extends a finite injection to a permutation, pairing the unassigned
/// sources with the unused images in increasing order.
pub fn complete(assign: &BTreeMap<u32, u32>) -> WindowPerm {
    let window = assign.iter().map(|(&a, &b)| a.max(b) as usize + 1).max().unwrap_or(0);
    let mut map = vec![u32::MAX; window];
    let mut used = vec![false; window];
    for (&a, &b) in assign {
        map[a as usize] = b;
        used[b as usize] = true;
    }
    let mut free = (0..window as u32).filter(|&v| !used[v as usize]);
    for slot in map.iter_mut().filter(|s| **s == u32::MAX) {
        *slot = free.next().expect("sizes agree");
    }
    WindowPerm::from_map_unchecked(map)
}

/// `ρ` with `ρ⁻¹ σ^N ρ = target` on the target's domain.
pub fn match_on_window(sigma: &WindowPerm, power: usize, target: &PartialInjection) -> Result<WindowPerm> {
    PowerCycles::new(sigma, power).match_target(target)
}

/// Matches several `(σ_j, target_j)` pairs with one conjugator `ρ`, so
/// that `ρ⁻¹ σ_j^N ρ = target_j` on each target's domain.
///
/// Requires the `σ_j` to have pairwise disjoint supports. Each target is
/// embedded into cycles of its own `σ_j^N`; fixed targets go past every
/// window.
pub fn match_simultaneous(parts: &[(&WindowPerm, &PartialInjection)], power: usize) -> Result<WindowPerm> {
    let mut support_seen: BTreeSet<u32> = BTreeSet::new();
    for (sigma, _) in parts {
        let support: BTreeSet<u32> = (0..sigma.window() as u32).filter(|&n| sigma.apply(n) != n).collect();
        if !support_seen.is_disjoint(&support) {
            return Err(Error::SimultaneousMatchUnsupported("coordinate supports overlap".into()));
        }
        support_seen.extend(support);
    }
    let mut fresh = parts
        .iter()
        .flat_map(|(s, t)| std::iter::once(s.window() as u32).chain(t.keys().chain(t.values()).map(|&v| v + 1)))
        .max()
        .unwrap_or(0);
    let mut assign: BTreeMap<u32, u32> = BTreeMap::new();
    let mut powers = Vec::new();
    for (sigma, target) in parts {
        let pc = PowerCycles::new(sigma, power).without_fixed();
        let (part, next) = pc.assign(target, fresh)?;
        fresh = next;
        for (x, y) in part {
            if assign.insert(x, y).is_some_and(|old| old != y) {
                return Err(Error::SimultaneousMatchUnsupported(format!(
                    "point {x} is constrained by two coordinates"
                )));
            }
        }
        powers.push(pc.power);
    }
    let images: BTreeSet<u32> = assign.values().copied().collect();
    if images.len() != assign.len() {
        return Err(Error::SimultaneousMatchUnsupported("embeddings collide".into()));
    }
    let rho = complete(&assign);
    for (power, (_, target)) in powers.iter().zip(parts) {
        verify_match(power, &rho, target)?;
    }
    Ok(rho)
}
