use num_traits::Zero;

use crate::dyadic::DyadicMpt;
use crate::groups::window::WindowPerm;
use crate::rational::{pow2_inv, Q};

/// The Polish metric `d_p` and the uniform metric `d_u` on a base group,
/// both rational-valued and bounded by 1, with `d_p ≤ d_u`.
pub trait GroupMetric<G> {
    fn d_p(&self, a: &G, b: &G) -> Q;

    fn d_u(&self, a: &G, b: &G) -> Q;

    /// Whether `d_u` only takes the values 0 and 1.
    fn uniform_is_discrete(&self) -> bool;

    /// A radius `ρ > 0` such that `d_p(x, g) < ρ` and `d_p(y, h) < ρ` imply
    /// `d_u(x, y) ≥ d_u(g, h)`, when one is known.
    fn lsc_radius(&self, g: &G, h: &G) -> Option<Q>;
}

/// `d_p(σ,ρ) = Σ 2^-(n+1)` over displaced points, `d_u` discrete.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PermMetric;

impl GroupMetric<WindowPerm> for PermMetric {
    fn d_p(&self, a: &WindowPerm, b: &WindowPerm) -> Q {
        a.d_p(b)
    }

    fn d_u(&self, a: &WindowPerm, b: &WindowPerm) -> Q {
        a.d_u(b)
    }

    fn uniform_is_discrete(&self) -> bool {
        true
    }

    /// Agreement up to the first point where `g` and `h` differ keeps them
    /// apart.
    fn lsc_radius(&self, g: &WindowPerm, h: &WindowPerm) -> Option<Q> {
        let w = g.window().max(h.window()) as u32;
        Some(match (0..w).find(|&n| g.apply(n) != h.apply(n)) {
            Some(n) => pow2_inv(n + 1),
            None => Q::from_integer(1.into()),
        })
    }
}

/// The weak metric and `Δᵤ` on interval permutations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MptMetric;

impl GroupMetric<DyadicMpt> for MptMetric {
    fn d_p(&self, a: &DyadicMpt, b: &DyadicMpt) -> Q {
        a.delta_w(b)
    }

    fn d_u(&self, a: &DyadicMpt, b: &DyadicMpt) -> Q {
        a.delta_u(b)
    }

    fn uniform_is_discrete(&self) -> bool {
        false
    }

    fn lsc_radius(&self, g: &DyadicMpt, h: &DyadicMpt) -> Option<Q> {
        g.delta_u(h).is_zero().then(|| Q::from_integer(1.into()))
    }
}
