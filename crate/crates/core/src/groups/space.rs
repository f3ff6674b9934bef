//! Metric spaces acted on by a base isometry group.

use std::fmt::Debug;

use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::groups::metric::{GroupMetric, PermMetric};
use crate::groups::window::WindowPerm;
use crate::rational::{max, one, pow2_inv, zero, GeometricSum, Q};

/// A metric space `X` with a group of isometries acting on it, plus the two
/// metrics on that group.
pub trait IsometrySpace: GroupMetric<Self::Iso> {
    type Point: Clone + Eq + Ord + Debug;
    type Iso: Group;

    fn dist(&self, a: &Self::Point, b: &Self::Point) -> Q;

    fn act(&self, g: &Self::Iso, x: &Self::Point) -> Self::Point;

    /// Whether `X` carries the discrete metric.
    fn is_discrete(&self) -> bool;

    /// Up to four canonical points used to build test functions.
    fn marked_points(&self) -> Vec<Self::Point>;

    /// A pair at maximal distance among the marked points.
    fn anchor_pair(&self) -> Result<(Self::Point, Self::Point)> {
        let pts = self.marked_points();
        let mut best: Option<(Q, usize, usize)> = None;
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let d = self.dist(&pts[i], &pts[j]);
                if best.as_ref().is_none_or(|(b, _, _)| d > *b) {
                    best = Some((d, i, j));
                }
            }
        }
        match best {
            Some((d, i, j)) if d > Q::zero() => Ok((pts[i].clone(), pts[j].clone())),
            _ => Err(Error::DegenerateSpace),
        }
    }

    /// A point `x` maximising `d(g x, x)`, if `g` moves anything.
    fn displacement_witness(&self, g: &Self::Iso) -> Option<Self::Point>;

    /// `count` distinct points fixed by every listed isometry and distinct
    /// from every listed point; empty if the space has none to spare.
    fn fresh_points(&self, isos: &[&Self::Iso], avoid: &[Self::Point], count: usize) -> Vec<Self::Point>;

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point;

    fn random_iso<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Iso;
}

/// The naturals with the discrete metric, acted on by window permutations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Naturals {
    /// Points and permutation windows drawn by the samplers stay below this.
    pub sample_window: u32,
}

impl Default for Naturals {
    fn default() -> Self {
        Self { sample_window: 8 }
    }
}

impl GroupMetric<WindowPerm> for Naturals {
    fn d_p(&self, g: &WindowPerm, h: &WindowPerm) -> Q {
        PermMetric.d_p(g, h)
    }

    fn d_u(&self, g: &WindowPerm, h: &WindowPerm) -> Q {
        PermMetric.d_u(g, h)
    }

    fn uniform_is_discrete(&self) -> bool {
        true
    }

    fn lsc_radius(&self, g: &WindowPerm, h: &WindowPerm) -> Option<Q> {
        PermMetric.lsc_radius(g, h)
    }
}

impl IsometrySpace for Naturals {
    type Point = u32;
    type Iso = WindowPerm;

    fn dist(&self, a: &u32, b: &u32) -> Q {
        if a == b {
            zero()
        } else {
            one()
        }
    }

    fn act(&self, g: &WindowPerm, x: &u32) -> u32 {
        g.apply(*x)
    }

    fn is_discrete(&self) -> bool {
        true
    }

    fn marked_points(&self) -> Vec<u32> {
        (0..4).collect()
    }

    fn displacement_witness(&self, g: &WindowPerm) -> Option<u32> {
        (0..g.window() as u32).find(|&n| g.apply(n) != n)
    }

    fn fresh_points(&self, isos: &[&WindowPerm], avoid: &[u32], count: usize) -> Vec<u32> {
        let start = isos.iter().map(|g| g.window() as u32).chain(avoid.iter().map(|&p| p + 1)).max().unwrap_or(0);
        (start..start + count as u32).collect()
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.gen_range(0..self.sample_window)
    }

    fn random_iso<R: Rng + ?Sized>(&self, rng: &mut R) -> WindowPerm {
        let w = rng.gen_range(0..=self.sample_window) as usize;
        let mut map: Vec<u32> = (0..w as u32).collect();
        map.shuffle(rng);
        WindowPerm::new(map).expect("shuffled identity")
    }
}

/// A finite metric space `{0, …, k-1}` with rational distances; its
/// isometries are the distance-preserving permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSpace {
    dist: Vec<Vec<Q>>,
    isometries: Vec<WindowPerm>,
}

impl FiniteSpace {
    /// At most 8 points, so the isometry group can be enumerated; distances
    /// lie in `(0, 1]`.
    pub fn new(dist: Vec<Vec<Q>>) -> Result<Self> {
        let k = dist.len();
        if k == 0 || k > 8 {
            return Err(Error::Invalid("finite space needs 1 to 8 points".into()));
        }
        for i in 0..k {
            if dist[i].len() != k || !dist[i][i].is_zero() {
                return Err(Error::Invalid("distance matrix must be square with zero diagonal".into()));
            }
            for j in 0..k {
                if dist[i][j] != dist[j][i] || (i != j && (dist[i][j] <= Q::zero() || dist[i][j] > one())) {
                    return Err(Error::Invalid(format!("bad distance between {i} and {j}")));
                }
                for m in 0..k {
                    if dist[i][m] > &dist[i][j] + &dist[j][m] {
                        return Err(Error::Invalid(format!("triangle inequality fails at {i},{j},{m}")));
                    }
                }
            }
        }
        let mut isometries = Vec::new();
        let mut perm: Vec<u32> = (0..k as u32).collect();
        permutations(&mut perm, 0, &mut |p| {
            let ok = (0..k).all(|i| (0..k).all(|j| dist[p[i] as usize][p[j] as usize] == dist[i][j]));
            if ok {
                isometries.push(WindowPerm::new(p.to_vec()).expect("permutation"));
            }
        });
        Ok(Self { dist, isometries })
    }

    /// Points of the line with `|x - y|` as distance.
    pub fn on_line(points: &[Q]) -> Result<Self> {
        let dist = points.iter().map(|x| points.iter().map(|y| num_traits::Signed::abs(&(x - y))).collect()).collect();
        Self::new(dist)
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn isometries(&self) -> &[WindowPerm] {
        &self.isometries
    }
}

fn permutations(p: &mut Vec<u32>, at: usize, visit: &mut impl FnMut(&[u32])) {
    if at == p.len() {
        visit(p);
        return;
    }
    for i in at..p.len() {
        p.swap(at, i);
        permutations(p, at + 1, visit);
        p.swap(at, i);
    }
}

impl GroupMetric<WindowPerm> for FiniteSpace {
    /// `Σ_m 2^-(m+1) d(g m, h m)`.
    fn d_p(&self, g: &WindowPerm, h: &WindowPerm) -> Q {
        let mut acc = GeometricSum::new();
        for m in 0..self.len() as u32 {
            acc.push(self.dist(&g.apply(m), &h.apply(m)));
        }
        acc.total()
    }

    fn d_u(&self, g: &WindowPerm, h: &WindowPerm) -> Q {
        (0..self.len() as u32).fold(zero(), |acc, m| max(&acc, &self.dist(&g.apply(m), &h.apply(m))))
    }

    fn uniform_is_discrete(&self) -> bool {
        self.is_discrete()
    }

    /// Pinning the point where `d_u(g, h)` is attained keeps the distance.
    fn lsc_radius(&self, g: &WindowPerm, h: &WindowPerm) -> Option<Q> {
        let du = self.d_u(g, h);
        let gap = self.dist.iter().flatten().filter(|d| !d.is_zero()).min()?.clone();
        let k = (0..self.len() as u32).find(|&m| self.dist(&g.apply(m), &h.apply(m)) == du)?;
        Some(gap * pow2_inv(k + 1))
    }
}

impl IsometrySpace for FiniteSpace {
    type Point = u32;
    type Iso = WindowPerm;

    fn dist(&self, a: &u32, b: &u32) -> Q {
        self.dist[*a as usize][*b as usize].clone()
    }

    fn act(&self, g: &WindowPerm, x: &u32) -> u32 {
        g.apply(*x)
    }

    fn is_discrete(&self) -> bool {
        self.dist.iter().flatten().all(|d| d.is_zero() || *d == one())
    }

    fn marked_points(&self) -> Vec<u32> {
        (0..self.len().min(4) as u32).collect()
    }

    fn displacement_witness(&self, g: &WindowPerm) -> Option<u32> {
        let best = (0..self.len() as u32)
            .max_by(|&a, &b| self.dist(&g.apply(a), &a).cmp(&self.dist(&g.apply(b), &b)).then(b.cmp(&a)))?;
        (g.apply(best) != best).then_some(best)
    }

    fn fresh_points(&self, _isos: &[&WindowPerm], _avoid: &[u32], _count: usize) -> Vec<u32> {
        Vec::new()
    }

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        rng.gen_range(0..self.len() as u32)
    }

    fn random_iso<R: Rng + ?Sized>(&self, rng: &mut R) -> WindowPerm {
        self.isometries.choose(rng).expect("identity is an isometry").clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn three_point_line() {
        let x = FiniteSpace::on_line(&[zero(), ratio(1, 2), one()]).unwrap();
        assert_eq!(x.isometries().len(), 2);
        let flip = &x.isometries()[1];
        assert_eq!(flip.apply(0), 2);
        let (a, b) = x.anchor_pair().unwrap();
        assert_eq!(x.dist(&a, &b), one());
        assert_eq!(x.d_u(flip, &WindowPerm::identity()), one());
        // 1/2·1 + 1/4·0 + 1/8·1
        assert_eq!(x.d_p(flip, &WindowPerm::identity()), ratio(5, 8));
        assert!(!x.is_discrete());
    }

    #[test]
    fn degenerate_and_invalid() {
        let one_point = FiniteSpace::new(vec![vec![zero()]]).unwrap();
        assert_eq!(one_point.anchor_pair(), Err(Error::DegenerateSpace));
        assert!(FiniteSpace::new(vec![
            vec![zero(), one(), ratio(3, 1)],
            vec![one(), zero(), one()],
            vec![ratio(3, 1), one(), zero()],
        ])
        .is_err());
        assert!(FiniteSpace::on_line(&[zero(), ratio(2, 1)]).is_err());
    }

    #[test]
    fn naturals_fresh_points() {
        let n = Naturals::default();
        let g: WindowPerm = "(0 3)".parse().unwrap();
        assert_eq!(n.fresh_points(&[&g], &[7], 2), vec![8, 9]);
        assert_eq!(n.displacement_witness(&g), Some(0));
    }
}
