//! Rokhlin towers and the uniform periodic approximation.

use num_traits::Zero;

use crate::dyadic::mpt::DyadicMpt;
use crate::dyadic::set::DyadicSet;
use crate::error::{Error, Result};
use crate::rational::{dyadic, fmt as qfmt, ratio, Q};

/// Finest level any tower construction may refine to.
pub const MAX_TOWER_LEVEL: u32 = 20;

/// A height-`N` Rokhlin tower of an interval permutation.
#[derive(Debug, Clone)]
pub struct TowerData {
    pub level: u32,
    pub height: usize,
    pub base: DyadicSet,
    /// `levels[k] = T^k(base)`.
    pub levels: Vec<DyadicSet>,
    pub leftover: DyadicSet,
    /// Each column lists `x, T(x), …, T^{N-1}(x)` for a base interval `x`,
    /// in the order the columns were laid along the cycles.
    pub columns: Vec<Vec<usize>>,
    /// Period-`N` map agreeing with `T` below the top level; present when the
    /// leftover can be grouped into `N`-cycles at this level.
    pub periodic_map: Option<DyadicMpt>,
}

/// A tower of a period-`N` map whose columns cover all of `[0,1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactTower {
    pub level: u32,
    pub height: usize,
    pub columns: Vec<Vec<usize>>,
}

impl ExactTower {
    pub fn base(&self) -> DyadicSet {
        DyadicSet::new(self.level, self.columns.iter().map(|c| c[0])).expect("in range")
    }

    /// The period-`N` map cycling every column.
    pub fn periodic_map(&self) -> DyadicMpt {
        let mut perm: Vec<u32> = (0..1u32 << self.level).collect();
        for c in &self.columns {
            for k in 0..c.len() {
                perm[c[k]] = c[(k + 1) % c.len()] as u32;
            }
        }
        DyadicMpt::from_perm_unchecked(self.level, perm)
    }

    /// The same tower viewed at a finer level: every column splits into
    /// `2^(m - level)` parallel columns.
    pub fn refine(&self, m: u32) -> Self {
        assert!(m >= self.level, "refinement must not coarsen");
        let f = 1usize << (m - self.level);
        let columns =
            self.columns.iter().flat_map(|c| (0..f).map(move |s| c.iter().map(|&i| i * f + s).collect())).collect();
        Self { level: m, height: self.height, columns }
    }

    /// `(column, height)` of every interval.
    pub fn locate(&self) -> Vec<(usize, usize)> {
        let mut at = vec![(usize::MAX, usize::MAX); 1usize << self.level];
        for (ci, c) in self.columns.iter().enumerate() {
            for (k, &i) in c.iter().enumerate() {
                at[i] = (ci, k);
            }
        }
        at
    }

    /// Checks coverage, disjointness and column lengths.
    pub fn validate(&self) -> Result<()> {
        let n = 1usize << self.level;
        let mut seen = vec![false; n];
        for c in &self.columns {
            if c.len() != self.height {
                return Err(Error::NotExactTower(format!("column of length {}", c.len())));
            }
            for &i in c {
                if i >= n || seen[i] {
                    return Err(Error::NotExactTower(format!("interval {i} repeated")));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::NotExactTower(format!("interval {i} uncovered")));
        }
        Ok(())
    }
}

/// A period-`N` approximation `S₀` of `T` with its exact tower.
#[derive(Debug, Clone)]
pub struct PeriodicApproximation {
    pub tower: TowerData,
    pub exact: ExactTower,
    pub s0: DyadicMpt,
    /// `Δᵤ(T, S₀)`.
    pub distance: Q,
}

fn leftover_bound(t: &DyadicMpt, height: usize) -> usize {
    t.cycles().iter().map(|c| c.len() % height).sum()
}

fn build_tower(t: &DyadicMpt, height: usize) -> TowerData {
    let level = t.level();
    let mut columns = Vec::new();
    let mut leftover = Vec::new();
    for cycle in t.cycles() {
        let full = cycle.len() / height;
        for q in 0..full {
            columns.push(cycle[q * height..(q + 1) * height].to_vec());
        }
        leftover.extend_from_slice(&cycle[full * height..]);
    }
    let levels: Vec<DyadicSet> =
        (0..height).map(|k| DyadicSet::new(level, columns.iter().map(|c| c[k])).expect("in range")).collect();
    let leftover = DyadicSet::new(level, leftover).expect("in range");
    let periodic_map = leftover
        .count()
        .is_multiple_of(height)
        .then(|| ExactTower { level, height, columns: exact_columns(&columns, &leftover, height) }.periodic_map());
    TowerData {
        level,
        height,
        base: levels.first().cloned().unwrap_or_else(|| DyadicSet::empty(level)),
        levels,
        leftover,
        columns,
        periodic_map,
    }
}

fn exact_columns(columns: &[Vec<usize>], leftover: &DyadicSet, height: usize) -> Vec<Vec<usize>> {
    let rest: Vec<usize> = leftover.members().iter().copied().collect();
    let mut out = columns.to_vec();
    out.extend(rest.chunks(height).map(<[usize]>::to_vec));
    out
}

/// Builds a height-`N` tower by marking every `N`-th interval along each
/// cycle, stopping before wraparound.
///
/// Refines `T` (up to [`MAX_TOWER_LEVEL`]) when that lets the leftover be
/// grouped into `N`-cycles; the leftover measure is unaffected.
pub fn rokhlin_tower(t: &DyadicMpt, height: usize, eps: &Q) -> Result<TowerData> {
    if height == 0 {
        return Err(Error::Invalid("tower height must be positive".into()));
    }
    if *eps <= Q::zero() {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let shortest = t.min_cycle_len();
    if shortest < height {
        return Err(Error::NotAperiodic { shortest, required: height });
    }
    let r = leftover_bound(t, height);
    let leftover = dyadic(r, t.level());
    if leftover > *eps {
        return Err(Error::TowerTooCoarse { leftover: qfmt(&leftover), tolerance: qfmt(eps) });
    }
    let mut level = t.level();
    let mut count = r;
    while !count.is_multiple_of(height) && level < MAX_TOWER_LEVEL {
        level += 1;
        count *= 2;
    }
    if !count.is_multiple_of(height) {
        level = t.level();
    }
    let tower = build_tower(&t.refine(level), height);
    debug_assert_eq!(tower.leftover.measure(), leftover);
    Ok(tower)
}

/// Period-`N` map `S₀` equal to `T` below the top of every column, sending
/// the top level back to the base, and cycling the leftover in index order.
pub fn periodic_approximation(t: &DyadicMpt, height: usize, eps: &Q) -> Result<PeriodicApproximation> {
    let tower = rokhlin_tower(t, height, eps)?;
    let Some(s0) = tower.periodic_map.clone() else {
        return Err(Error::LeftoverIndivisible { count: tower.leftover.count(), height, max_level: MAX_TOWER_LEVEL });
    };
    let exact =
        ExactTower { level: tower.level, height, columns: exact_columns(&tower.columns, &tower.leftover, height) };
    let distance = t.delta_u(&s0);
    debug_assert!(distance <= eps + ratio(1, height as i64));
    Ok(PeriodicApproximation { tower, exact, s0, distance })
}
