use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::rational::{one, weighted_index_sum, zero, Q};

/// Permutation of the naturals that fixes every point outside a finite
/// window `{0, …, M-1}`.
///
/// Equality ignores the window: two permutations are equal when they move
/// the same points the same way.
#[derive(Debug, Clone)]
pub struct WindowPerm {
    map: Vec<u32>,
}

impl WindowPerm {
    pub fn new(map: Vec<u32>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            let v = v as usize;
            if v >= n || seen[v] {
                return Err(Error::NotBijection(format!("value {v} in window {n}")));
            }
            seen[v] = true;
        }
        Ok(Self { map })
    }

    pub(crate) fn from_map_unchecked(map: Vec<u32>) -> Self {
        Self { map }
    }

    pub fn identity_on(window: usize) -> Self {
        Self { map: (0..window as u32).collect() }
    }

    /// Builds a permutation from disjoint cycles; the window is one past the
    /// largest listed point.
    pub fn from_cycles(cycles: &[Vec<u32>]) -> Result<Self> {
        let window = cycles.iter().flatten().map(|&v| v as usize + 1).max().unwrap_or(0);
        let mut map: Vec<u32> = (0..window as u32).collect();
        let mut seen = vec![false; window];
        for c in cycles {
            for (k, &v) in c.iter().enumerate() {
                if std::mem::replace(&mut seen[v as usize], true) {
                    return Err(Error::NotBijection(format!("point {v} listed twice")));
                }
                map[v as usize] = c[(k + 1) % c.len()];
            }
        }
        Ok(Self { map })
    }

    pub fn window(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[u32] {
        &self.map
    }

    pub fn apply(&self, n: u32) -> u32 {
        self.map.get(n as usize).copied().unwrap_or(n)
    }

    /// One past the largest moved point.
    pub fn support_end(&self) -> usize {
        self.map.iter().enumerate().rposition(|(i, &v)| i as u32 != v).map_or(0, |i| i + 1)
    }

    pub fn with_window(&self, window: usize) -> Self {
        let w = window.max(self.support_end());
        let mut map = self.map.clone();
        map.truncate(w);
        map.extend(map.len() as u32..w as u32);
        Self { map }
    }

    /// Conjugate by the translation `n ↦ n + offset`.
    pub fn shifted(&self, offset: u32) -> Self {
        let mut map: Vec<u32> = (0..offset).collect();
        map.extend(self.map.iter().map(|&v| v + offset));
        Self { map }
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &Self) -> Self {
        let w = self.window().max(rhs.window());
        Self { map: (0..w as u32).map(|n| self.apply(rhs.apply(n))).collect() }
    }

    pub fn inverse(&self) -> Self {
        let mut map = vec![0u32; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            map[v as usize] = i as u32;
        }
        Self { map }
    }

    /// Cycles inside the window, each starting at its smallest point, sorted
    /// by that point. Fixed points of the window are included.
    pub fn cycles(&self) -> Vec<Vec<u32>> {
        let n = self.map.len();
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
                c.push(i as u32);
                i = self.map[i] as usize;
            }
            out.push(c);
        }
        out
    }

    /// Number of cycles of each length inside the window.
    pub fn census(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for c in self.cycles() {
            *out.entry(c.len()).or_default() += 1;
        }
        out
    }

    /// `Σ 2^-(n+1)` over points where the two permutations differ.
    pub fn d_p(&self, other: &Self) -> Q {
        let w = self.window().max(other.window()) as u32;
        weighted_index_sum((0..w).filter(|&n| self.apply(n) != other.apply(n)).map(|n| n as usize))
    }

    /// Discrete metric.
    pub fn d_u(&self, other: &Self) -> Q {
        if self == other {
            zero()
        } else {
            one()
        }
    }
}

/// `(d_p, d_u)` between two permutations.
pub fn perm_metrics(a: &WindowPerm, b: &WindowPerm) -> (Q, Q) {
    (a.d_p(b), a.d_u(b))
}

impl PartialEq for WindowPerm {
    fn eq(&self, other: &Self) -> bool {
        let e = self.support_end();
        e == other.support_end() && self.map[..e] == other.map[..e]
    }
}

impl Eq for WindowPerm {}

impl Hash for WindowPerm {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.map[..self.support_end()].hash(state);
    }
}

impl Group for WindowPerm {
    fn identity() -> Self {
        Self::identity_on(0)
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.compose(rhs)
    }

    fn inv(&self) -> Self {
        self.inverse()
    }

    fn is_identity(&self) -> bool {
        self.support_end() == 0
    }
}

impl fmt::Display for WindowPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut any = false;
        for c in self.cycles().into_iter().filter(|c| c.len() > 1) {
            any = true;
            write!(f, "(")?;
            for (k, v) in c.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ")")?;
        }
        if !any {
            write!(f, "()")?;
        }
        Ok(())
    }
}

impl FromStr for WindowPerm {
    type Err = Error;

    /// Disjoint-cycle notation such as `(0 1)(2 3 4)`; `()` is the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut cycles = Vec::new();
        let mut rest = s;
        while !rest.is_empty() {
            let open =
                rest.strip_prefix('(').ok_or_else(|| Error::Parse(format!("expected '(' in permutation {s:?}")))?;
            let close = open.find(')').ok_or_else(|| Error::Parse(format!("unclosed cycle in {s:?}")))?;
            let body = &open[..close];
            let cycle = body
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<u32>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<u32>>>()?;
            if !cycle.is_empty() {
                cycles.push(cycle);
            }
            rest = open[close + 1..].trim_start();
        }
        Self::from_cycles(&cycles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn p(s: &str) -> WindowPerm {
        s.parse().unwrap()
    }

    #[test]
    fn metrics_of_transpositions() {
        let id = WindowPerm::identity();
        assert_eq!(perm_metrics(&id, &id), (zero(), zero()));
        assert_eq!(perm_metrics(&p("(0 1)"), &id), (ratio(3, 4), one()));
        assert_eq!(perm_metrics(&p("(5 6)"), &id), (ratio(3, 128), one()));
    }

    #[test]
    fn equality_ignores_window() {
        assert_eq!(WindowPerm::identity_on(5), WindowPerm::identity());
        assert_eq!(p("(0 1)").with_window(10), p("(0 1)(4)"));
        assert_ne!(p("(0 1)"), p("(1 2)"));
    }

    #[test]
    fn compose_extends_window() {
        let a = p("(0 1)");
        let b = p("(1 5)");
        let ab = a.compose(&b);
        assert_eq!(ab.apply(1), 5);
        assert_eq!(ab.apply(5), 0);
        assert_eq!(ab.apply(0), 1);
        assert!(ab.compose(&ab.inverse()).is_identity());
    }

    #[test]
    fn display_round_trip() {
        let a = p("(0 1)(2 3 4)");
        assert_eq!(a.to_string(), "(0 1)(2 3 4)");
        assert_eq!(WindowPerm::identity().to_string(), "()");
        assert_eq!(p("()"), WindowPerm::identity());
        assert!("(0 1)(1 2)".parse::<WindowPerm>().is_err());
        assert!("0 1".parse::<WindowPerm>().is_err());
    }

    #[test]
    fn shift_moves_support() {
        let a = p("(0 1 2)").shifted(4);
        assert_eq!(a, p("(4 5 6)"));
    }
}
