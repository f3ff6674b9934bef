//! The uniform metric `Lᵤ(a, b) = sup_α d̂(a·α, b·α)`.
//!
//! Every function here first reduces to `(h, R) = b⁻¹·a` and compares it
//! with the identity.

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{DyadicMpt, DyadicSet};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::groups::IsometrySpace;
use crate::l0::{dhat_u, StepFn};
use crate::rational::{dyadic, max, ratio, Q};
use crate::tilde::element::{dhat_x, TildeElement};

/// `b⁻¹·a` with both components brought to a common level.
fn reduce<G: Group>(a: &TildeElement<G>, b: &TildeElement<G>) -> (StepFn<G>, DyadicMpt) {
    let x = b.inverse().product(a);
    let level = x.level();
    (x.fiber.refine(level), x.base.refine(level))
}

/// `μ({h ≠ e} ∪ {R ≠ id})`, the exact value when the space is discrete.
pub fn lu_exact_discrete<S: IsometrySpace>(space: &S, a: &TildeElement<S::Iso>, b: &TildeElement<S::Iso>) -> Result<Q> {
    if !space.is_discrete() {
        return Err(Error::NotDiscrete);
    }
    let (h, r) = reduce(a, b);
    let e = S::Iso::identity();
    let count = (0..r.len()).filter(|&i| r.apply(i) != i || *h.value(i) != e).count();
    Ok(dyadic(count, r.level()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LuBounds {
    /// `d(x₁, x₂)` for the anchor pair.
    pub r: Q,
    /// `(r/8)·μ(B) + ∫_A d_u(h, e)`.
    pub lower: Q,
    /// `μ(B) + ∫_A d_u(h, e)`.
    pub upper: Q,
    /// `(r/8)·max{μ(B), d̂ᵤ(h, C_e)}`.
    pub max_lower: Q,
    /// `d̂ᵤ(h, C_e) + Δᵤ(R, Id)`.
    pub product_sum: Q,
    /// `max{d̂ᵤ(h, C_e), Δᵤ(R, Id)}`.
    pub product_max: Q,
}

/// Measures of `A = {h ≠ e, R fixes ω}` weighted by `d_u(h, e)`, and of
/// `B = {R ≠ id}`.
fn regions<S: IsometrySpace>(space: &S, h: &StepFn<S::Iso>, r: &DyadicMpt) -> (Q, Q) {
    let e = S::Iso::identity();
    let moved = DyadicSet::new(r.level(), (0..r.len()).filter(|&i| r.apply(i) != i)).expect("in range");
    let mut fixed_part = Q::zero();
    for i in 0..r.len() {
        if r.apply(i) == i {
            fixed_part += space.d_u(h.value(i), &e);
        }
    }
    (fixed_part * dyadic(1, r.level()), moved.measure())
}

/// Sandwich bounds for `Lᵤ(a, b)` with `r` taken from the space's anchor
/// pair.
pub fn lu_bounds<S: IsometrySpace>(space: &S, a: &TildeElement<S::Iso>, b: &TildeElement<S::Iso>) -> Result<LuBounds> {
    let (x1, x2) = space.anchor_pair()?;
    lu_bounds_with(space, a, b, &x1, &x2)
}

pub fn lu_bounds_with<S: IsometrySpace>(
    space: &S,
    a: &TildeElement<S::Iso>,
    b: &TildeElement<S::Iso>,
    x1: &S::Point,
    x2: &S::Point,
) -> Result<LuBounds> {
    let r = space.dist(x1, x2);
    if r.is_zero() {
        return Err(Error::DegenerateSpace);
    }
    let (h, perm) = reduce(a, b);
    let (on_fixed, moved) = regions(space, &h, &perm);
    let eighth = &r / ratio(8, 1);
    let fiber_u = dhat_u(space, &h, &StepFn::identity());
    Ok(LuBounds {
        lower: &eighth * &moved + &on_fixed,
        upper: &moved + &on_fixed,
        max_lower: &eighth * max(&moved, &fiber_u),
        product_sum: &fiber_u + &moved,
        product_max: max(&fiber_u, &moved),
        r,
    })
}

/// The best colouring of one `R`-cycle `ω₀ → ω₁ → …` from `palette`,
/// maximising `Σ_j d(h(ω_j)·α(ω_{j-1}), α(ω_j))`.
fn best_cycle_colouring<S: IsometrySpace>(
    space: &S,
    h: &StepFn<S::Iso>,
    cycle: &[usize],
    palette: &[S::Point],
) -> Vec<usize> {
    let p = palette.len();
    let len = cycle.len();
    let term = |j: usize, prev: usize, cur: usize| {
        let w = cycle[j];
        space.dist(&space.act(h.value(w), &palette[prev]), &palette[cur])
    };
    let mut best: Option<(Q, Vec<usize>)> = None;
    for first in 0..p {
        // score[c], back[j][c]: best path ω₀..ω_j ending in colour c.
        let mut score: Vec<Option<Q>> = vec![None; p];
        score[first] = Some(Q::zero());
        let mut back = vec![vec![0usize; p]; len];
        for j in 1..len {
            let mut next: Vec<Option<Q>> = vec![None; p];
            for cur in 0..p {
                for prev in 0..p {
                    if let Some(s) = &score[prev] {
                        let cand = s + term(j, prev, cur);
                        if next[cur].as_ref().is_none_or(|b| cand > *b) {
                            next[cur] = Some(cand);
                            back[j][cur] = prev;
                        }
                    }
                }
            }
            score = next;
        }
        for last in 0..p {
            let Some(s) = &score[last] else { continue };
            let total = s + term(0, last, first);
            if best.as_ref().is_none_or(|(b, _)| total > *b) {
                let mut colours = vec![0usize; len];
                let mut c = last;
                for j in (1..len).rev() {
                    colours[j] = c;
                    c = back[j][c];
                }
                colours[0] = first;
                best = Some((total, colours));
            }
        }
    }
    best.map(|(_, c)| c).unwrap_or_default()
}

/// Witness family: on fixed points of `R` a point moved furthest by `h`,
/// on each cycle of `R` an optimal colouring from the marked points and
/// three points fixed by every value of `h`.
pub fn witness<S: IsometrySpace>(space: &S, a: &TildeElement<S::Iso>, b: &TildeElement<S::Iso>) -> StepFn<S::Point> {
    let (h, perm) = reduce(a, b);
    let marked = space.marked_points();
    let isos: Vec<&S::Iso> = h.values().iter().collect();
    let mut palette = marked.clone();
    palette.extend(space.fresh_points(&isos, &marked, 3));
    let mut values = vec![palette[0].clone(); perm.len()];
    for cycle in perm.cycles() {
        if cycle.len() == 1 {
            let w = cycle[0];
            let g = h.value(w);
            let candidates = palette.iter().cloned().chain(space.displacement_witness(g));
            let best = candidates.map(|x| (space.dist(&space.act(g, &x), &x), x)).fold(
                None::<(Q, S::Point)>,
                |acc, (d, x)| match acc {
                    Some((bd, bx)) if bd >= d => Some((bd, bx)),
                    _ => Some((d, x)),
                },
            );
            if let Some((_, x)) = best {
                values[w] = x;
            }
        } else {
            for (w, c) in cycle.iter().zip(best_cycle_colouring(space, &h, &cycle, &palette)) {
                values[*w] = palette[c].clone();
            }
        }
    }
    StepFn::new(perm.level(), values).expect("length")
}

/// `max d̂(a·α, b·α)` over the witness family and `budget` random step
/// functions; always a lower bound for `Lᵤ(a, b)`.
pub fn lu_estimate<S: IsometrySpace>(
    space: &S,
    a: &TildeElement<S::Iso>,
    b: &TildeElement<S::Iso>,
    budget: usize,
    seed: u64,
) -> Q {
    let eval = |alpha: &StepFn<S::Point>| dhat_x(space, &a.act(space, alpha), &b.act(space, alpha));
    let mut best = eval(&witness(space, a, b));
    let level = a.level().max(b.level());
    for i in 0..budget {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let alpha = StepFn::random(level, &mut rng, |r| space.random_point(r));
        best = max(&best, &eval(&alpha));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FiniteSpace, Naturals, WindowPerm};
    use crate::rational::{one, zero};

    fn swap() -> WindowPerm {
        "(0 1)".parse().unwrap()
    }

    #[test]
    fn exact_formula_examples() {
        let sp = Naturals::default();
        let e = WindowPerm::identity();
        let h = StepFn::new(2, vec![e.clone(), e.clone(), e.clone(), swap()]).unwrap();
        let r = DyadicMpt::from_cycles(2, &[vec![0, 1]]).unwrap();
        let x = TildeElement::new(h, r);
        let id = TildeElement::identity();
        assert_eq!(lu_exact_discrete(&sp, &x, &id).unwrap(), ratio(3, 4));
        assert_eq!(lu_exact_discrete(&sp, &x, &x).unwrap(), zero());
        assert_eq!(lu_estimate(&sp, &x, &id, 4, 1), ratio(3, 4));
        let cyc = TildeElement::from_base(DyadicMpt::shift(3, 1));
        assert_eq!(lu_exact_discrete(&sp, &cyc, &id).unwrap(), one());
        assert_eq!(lu_estimate(&sp, &cyc, &id, 1, 0), one());
    }

    #[test]
    fn odd_cycles_reach_full_distance() {
        let sp = Naturals::default();
        let r = DyadicMpt::from_cycles(2, &[vec![0, 1, 2]]).unwrap();
        let x = TildeElement::new(StepFn::constant(swap()), r);
        let exact = lu_exact_discrete(&sp, &x, &TildeElement::identity()).unwrap();
        assert_eq!(exact, one());
        assert_eq!(lu_estimate(&sp, &x, &TildeElement::identity(), 0, 0), one());
    }

    #[test]
    fn bounds_examples() {
        let sp = Naturals::default();
        let id = TildeElement::<WindowPerm>::identity();
        let b = lu_bounds(&sp, &id, &id).unwrap();
        assert_eq!((b.lower, b.upper), (zero(), zero()));
        let cyc = TildeElement::from_base(DyadicMpt::shift(3, 1));
        let b = lu_bounds(&sp, &cyc, &id).unwrap();
        assert_eq!((b.lower, b.upper), (ratio(1, 8), one()));
        let e = WindowPerm::identity();
        let f = StepFn::new(2, vec![swap(), e.clone(), e.clone(), e]).unwrap();
        let b = lu_bounds(&sp, &TildeElement::from_fiber(f), &id).unwrap();
        assert_eq!((b.lower, b.upper), (ratio(1, 4), ratio(1, 4)));
    }

    #[test]
    fn non_discrete_space() {
        let sp = FiniteSpace::on_line(&[zero(), ratio(1, 2), one()]).unwrap();
        let flip = sp.isometries()[1].clone();
        let x = TildeElement::new(StepFn::new(1, vec![flip, WindowPerm::identity()]).unwrap(), DyadicMpt::shift(2, 1));
        let id = TildeElement::identity();
        assert_eq!(lu_exact_discrete(&sp, &x, &id), Err(Error::NotDiscrete));
        let b = lu_bounds(&sp, &x, &id).unwrap();
        let est = lu_estimate(&sp, &x, &id, 16, 3);
        assert!(b.lower <= est && est <= b.upper, "{b:?} {est}");
    }
}
