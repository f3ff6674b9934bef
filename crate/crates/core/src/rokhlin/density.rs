//! Moving `(C_σ, T)` into product neighbourhoods by conjugation, the
//! constant-fiber conjugation under the uniform metric, and simultaneous
//! (diagonal) conjugation of tuples.

use num_traits::{ToPrimitive, Zero};

use crate::dyadic::{conjugacy::conjugate_by, mpt_conjugate_match, DyadicMpt, DyadicSet};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::groups::{IsometrySpace, Naturals, WindowPerm};
use crate::l0::StepFn;
use crate::rational::{fmt as qfmt, ratio, Q};
use crate::rokhlin::synthesis::{synthesize_conjugator, SynthesisTask};
use crate::tilde::{lu_bounds, lu_exact_discrete, ProductSpec, Residuals, TildeElement};

/// Constrained window `K` and tower height `N` for a product target: `K`
/// covers every value condition's point, and `N` is the least power of two
/// with `1/N` below half of the smallest value radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DensityPlan {
    pub window: usize,
    pub height: usize,
}

pub fn plan_density(target: &ProductSpec<Naturals>) -> DensityPlan {
    let window = target.values.iter().map(|(a, _)| *a as usize + 1).max().unwrap_or(0);
    let height = target.values.iter().map(|(_, r)| r).min().map_or(1, |r| {
        let mut n = 2usize;
        while Q::from_integer((n as i64).into()) * r <= ratio(2, 1) {
            n *= 2;
        }
        n
    });
    DensityPlan { window, height }
}

#[derive(Debug, Clone)]
pub struct DensityOutcome {
    pub conjugator: TildeElement<WindowPerm>,
    pub image: TildeElement<WindowPerm>,
    pub residuals: Residuals,
    /// `Δᵤ(Q⁻¹TQ, S)` for the centre's base map `S`.
    pub aut_distance: Q,
    pub plan: DensityPlan,
}

fn failure(component: &str, e: impl std::fmt::Display) -> Error {
    Error::OracleFailure { component: component.into(), reason: e.to_string() }
}

fn constant_value(source: &TildeElement<WindowPerm>) -> Result<WindowPerm> {
    let fiber = source.fiber.coarsen();
    if fiber.level() != 0 {
        return Err(Error::Invalid("source fiber must be constant".into()));
    }
    Ok(fiber.value(0).clone())
}

/// A refinement of `s` in which every cycle of `s` at `level` becomes one
/// cycle `2^extra` times longer; it moves every level-`level` set exactly
/// as `s` does.
pub fn aperiodic_lift(s: &DyadicMpt, level: u32, extra: u32) -> DyadicMpt {
    let coarse = s.refine(level.max(s.level()));
    let level = coarse.level();
    let fine = coarse.refine(level + extra);
    let parts = 1usize << extra;
    let mut twist: Vec<u32> = (0..fine.len() as u32).collect();
    for cycle in coarse.cycles() {
        let start = cycle[0] * parts;
        for k in 0..parts {
            twist[start + k] = (start + (k + 1) % parts) as u32;
        }
    }
    let twist = DyadicMpt::new(level + extra, twist).expect("rotation inside one interval");
    fine.compose(&twist)
}

/// `Q` with `Q⁻¹TQ` close enough to the centre's base map, or to its
/// aperiodic lift, for every set condition.
fn aut_step(t: &DyadicMpt, s: &DyadicMpt, sets: &[(DyadicSet, Q)]) -> Result<DyadicMpt> {
    let Some(r) = sets.iter().map(|(_, r)| r).min() else {
        return Ok(DyadicMpt::identity());
    };
    let half = r / ratio(2, 1);
    let level = sets.iter().map(|(a, _)| a.level()).fold(s.level(), u32::max);
    let shortest = s.refine(level).min_cycle_len();
    let wanted = (ratio(4, 1) / &half).ceil().to_integer().to_usize().unwrap_or(usize::MAX);
    let mut extra = 0u32;
    while shortest << extra < wanted {
        extra += 1;
    }
    let goal = if extra == 0 { s.clone() } else { aperiodic_lift(s, level, extra) };
    let m = mpt_conjugate_match(t, &goal, &half).map_err(|e| failure("aut", e))?;
    Ok(m.conjugator)
}

fn component_of_failure(res: &Residuals) -> &'static str {
    if res.sets.iter().any(|r| *r <= Q::zero()) {
        "aut"
    } else {
        "l0"
    }
}

/// Two-step conjugation of `(C_σ, T)` into a product neighbourhood: first
/// `(C_e, Q)` with `Q⁻¹TQ` near the centre's base map, then a fiber
/// conjugator from the tower synthesis against `Q⁻¹TQ`.
pub fn conjugate_into_neighborhood(
    space: &Naturals,
    source: &TildeElement<WindowPerm>,
    target: &ProductSpec<Naturals>,
) -> Result<DensityOutcome> {
    let sigma = constant_value(source)?;
    let plan = plan_density(target);
    if target.contains(space, source) {
        return Ok(DensityOutcome {
            conjugator: TildeElement::identity(),
            image: source.clone(),
            residuals: target.residuals(space, source),
            aut_distance: source.base.delta_u(&target.center.base),
            plan,
        });
    }
    let q = aut_step(&source.base, &target.center.base, &target.sets)?;
    let r = conjugate_by(&source.base, &q);

    let u = fiber_step(&sigma, &r, &target.center.fiber, plan)?;
    let conjugator = TildeElement::new(u.pushforward(&q), q);
    let image = source.conj(&conjugator);
    let residuals = target.residuals(space, &image);
    if !residuals.all_positive() {
        return Err(failure(component_of_failure(&residuals), "membership check failed"));
    }
    Ok(DensityOutcome { aut_distance: r.delta_u(&target.center.base), conjugator, image, residuals, plan })
}

/// `u` with `u(ω)⁻¹ σ u(R⁻¹ω)` equal to `f(ω)` on `0..K` off a set of measure
/// `Δᵤ(R, S₀) ≤ 1/N`.
fn fiber_step(
    sigma: &WindowPerm,
    r: &DyadicMpt,
    f: &StepFn<WindowPerm>,
    plan: DensityPlan,
) -> Result<StepFn<WindowPerm>> {
    if plan.window == 0 {
        return Ok(StepFn::identity());
    }
    let task = SynthesisTask {
        sigma: Some(sigma.clone()),
        s: r.clone(),
        target: f.clone(),
        window: plan.window,
        height: plan.height,
        eps: ratio(2, plan.height as i64),
        max_copies: 1,
    };
    Ok(synthesize_conjugator(&task).map_err(|e| failure("l0", e))?.g)
}

#[derive(Debug, Clone)]
pub struct ConstantConjugacy<G: Group> {
    pub conjugator: TildeElement<G>,
    pub image: TildeElement<G>,
    /// `Lᵤ(image, (C_h, S))`, or an upper bound for it.
    pub lu: Q,
    /// Whether `lu` is the exact value.
    pub exact: bool,
}

/// `(C_e, R)` with `Lᵤ((C_h, R⁻¹TR), (C_h, S)) < ε`, certified by the exact
/// formula on discrete spaces and the sandwich's upper bound elsewhere.
pub fn approx_conjugate_constant<S: IsometrySpace>(
    space: &S,
    h: &S::Iso,
    t: &DyadicMpt,
    s: &DyadicMpt,
    eps: &Q,
) -> Result<ConstantConjugacy<S::Iso>> {
    let m = mpt_conjugate_match(t, s, eps)?;
    let conjugator = TildeElement::from_base(m.conjugator);
    let image = TildeElement::constant(h.clone(), t.clone()).conj(&conjugator);
    let goal = TildeElement::constant(h.clone(), s.clone());
    let (lu, exact) = if space.is_discrete() {
        (lu_exact_discrete(space, &image, &goal)?, true)
    } else {
        (lu_bounds(space, &image, &goal)?.upper, false)
    };
    if lu >= *eps {
        return Err(Error::ToleranceNotMet { achieved: qfmt(&lu), tolerance: qfmt(eps) });
    }
    Ok(ConstantConjugacy { conjugator, image, lu, exact })
}

/// The part of `p` on the residue class `j mod n`, in local coordinates
/// `m ↦ n·m + j`; `None` unless `p` maps that class into itself.
pub fn class_part(p: &WindowPerm, n: usize, j: usize) -> Option<WindowPerm> {
    let (n, j) = (n as u32, j as u32);
    let w = p.window() as u32;
    let local_w = if w > j { (w - j).div_ceil(n) } else { 0 };
    let mut map = Vec::with_capacity(local_w as usize);
    for m in 0..local_w {
        let y = p.apply(n * m + j);
        if y % n != j {
            return None;
        }
        map.push((y - j) / n);
    }
    WindowPerm::new(map).ok()
}

/// Places `parts[j]` on the residue class `j mod parts.len()`.
pub fn interleave(parts: &[WindowPerm]) -> WindowPerm {
    let n = parts.len();
    let w = parts.iter().map(WindowPerm::window).max().unwrap_or(0) * n;
    let map = (0..w as u32)
        .map(|x| {
            let (m, j) = (x / n as u32, x as usize % n);
            parts[j].apply(m) * n as u32 + j as u32
        })
        .collect();
    WindowPerm::new(map).expect("classes are preserved")
}

#[derive(Debug, Clone)]
pub struct CoordinateReport {
    pub residuals: Residuals,
    pub member: bool,
}

#[derive(Debug, Clone)]
pub struct DiagonalReport {
    pub conjugator: TildeElement<WindowPerm>,
    pub coordinates: Vec<CoordinateReport>,
}

impl DiagonalReport {
    pub fn success(&self) -> bool {
        self.coordinates.iter().all(|c| c.member)
    }
}

fn report(
    space: &Naturals,
    sources: &[TildeElement<WindowPerm>],
    targets: &[ProductSpec<Naturals>],
    conjugator: TildeElement<WindowPerm>,
) -> DiagonalReport {
    let coordinates = sources
        .iter()
        .zip(targets)
        .map(|(x, spec)| {
            let residuals = spec.residuals(space, &x.conj(&conjugator));
            CoordinateReport { member: residuals.all_positive(), residuals }
        })
        .collect();
    DiagonalReport { conjugator, coordinates }
}

/// One conjugator for a tuple `((C_{σ_j}, T))_j` and product targets.
///
/// With `n ≥ 2` coordinates, coordinate `j` must live on the residue class
/// `j mod n`: `σ_j` is supported there, the centre's fiber values preserve
/// it and the value conditions sit on it. All sources share one base map
/// and all centres share one base map.
pub fn diagonal_experiment(
    space: &Naturals,
    sources: &[TildeElement<WindowPerm>],
    targets: &[ProductSpec<Naturals>],
) -> Result<DiagonalReport> {
    let n = sources.len();
    if n == 0 || n != targets.len() {
        return Err(Error::Invalid("need one target per coordinate".into()));
    }
    if sources.iter().zip(targets).all(|(x, spec)| spec.contains(space, x)) {
        return Ok(report(space, sources, targets, TildeElement::identity()));
    }
    if n == 1 {
        let out = conjugate_into_neighborhood(space, &sources[0], &targets[0])?;
        return Ok(report(space, sources, targets, out.conjugator));
    }
    let t = &sources[0].base;
    let s = &targets[0].center.base;
    if sources.iter().any(|x| !x.base.delta_u(t).is_zero())
        || targets.iter().any(|spec| !spec.center.base.delta_u(s).is_zero())
    {
        return Err(Error::SimultaneousMatchUnsupported("coordinates have different base maps".into()));
    }
    let sets: Vec<_> = targets.iter().flat_map(|spec| spec.sets.iter().cloned()).collect();
    let q = aut_step(t, s, &sets)?;
    let r = conjugate_by(t, &q);

    let mut locals = Vec::with_capacity(n);
    for (j, (x, spec)) in sources.iter().zip(targets).enumerate() {
        let unsupported = |what: &str| Error::SimultaneousMatchUnsupported(format!("coordinate {j}: {what}"));
        let sigma = constant_value(x)?;
        let local_sigma = class_part(&sigma, n, j).ok_or_else(|| unsupported("σ leaves its residue class"))?;
        if interleave_single(&local_sigma, n, j) != sigma {
            return Err(unsupported("σ moves points of other residue classes"));
        }
        let mut local_fiber = Vec::with_capacity(spec.center.fiber.values().len());
        for v in spec.center.fiber.values() {
            local_fiber.push(class_part(v, n, j).ok_or_else(|| unsupported("target fiber leaves the class"))?);
        }
        let mut local_values = Vec::with_capacity(spec.values.len());
        for (a, rad) in &spec.values {
            if *a as usize % n != j {
                return Err(unsupported("value condition off the residue class"));
            }
            local_values.push((a / n as u32, rad.clone()));
        }
        let local_spec = ProductSpec::<Naturals> {
            center: TildeElement::new(
                StepFn::new(spec.center.fiber.level(), local_fiber).expect("same length"),
                spec.center.base.clone(),
            ),
            values: local_values,
            sets: Vec::new(),
        };
        locals.push((local_sigma, local_spec));
    }
    let height = locals.iter().map(|(_, spec)| plan_density(spec).height).max().unwrap_or(1);
    let mut fibers = Vec::with_capacity(n);
    for (local_sigma, spec) in &locals {
        let plan = DensityPlan { window: plan_density(spec).window, height };
        fibers.push(fiber_step(local_sigma, &r, &spec.center.fiber, plan)?);
    }
    let level = fibers.iter().map(StepFn::level).max().unwrap_or(0);
    let fibers: Vec<StepFn<WindowPerm>> = fibers.iter().map(|f| f.refine(level)).collect();
    let u = StepFn::from_fn(level, |i| {
        let parts: Vec<WindowPerm> = fibers.iter().map(|f| f.value(i).clone()).collect();
        interleave(&parts)
    });
    let conjugator = TildeElement::new(u.pushforward(&q), q);
    Ok(report(space, sources, targets, conjugator))
}

/// `p` placed on class `j mod n`, identity elsewhere.
fn interleave_single(p: &WindowPerm, n: usize, j: usize) -> WindowPerm {
    let parts: Vec<WindowPerm> = (0..n).map(|i| if i == j { p.clone() } else { WindowPerm::identity() }).collect();
    interleave(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::power_surrogate;
    use crate::rational::zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> WindowPerm {
        s.parse().unwrap()
    }

    #[test]
    fn lift_keeps_coarse_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = DyadicMpt::random(3, &mut rng);
        let lift = aperiodic_lift(&s, 3, 4);
        assert_eq!(lift.level(), 7);
        let lengths: Vec<usize> = s.cycles().iter().map(|c| c.len() * 16).collect();
        let mut got: Vec<usize> = lift.cycles().iter().map(Vec::len).collect();
        let mut want = lengths.clone();
        got.sort_unstable();
        want.sort_unstable();
        assert_eq!(got, want);
        for i in 0..8 {
            let a = DyadicSet::new(3, [i]).unwrap();
            assert_eq!(lift.image(&a), s.image(&a).refine(7));
        }
    }

    #[test]
    fn plan_sizes() {
        let spec = ProductSpec::<Naturals> {
            center: TildeElement::identity(),
            values: vec![(1, ratio(1, 8)), (0, ratio(1, 4))],
            sets: vec![],
        };
        assert_eq!(plan_density(&spec), DensityPlan { window: 2, height: 32 });
    }

    #[test]
    fn centred_target_needs_nothing() {
        let src = TildeElement::constant(p("(0 1 2)"), DyadicMpt::shift(4, 1));
        let spec = ProductSpec::<Naturals> {
            center: src.clone(),
            values: vec![(0, ratio(1, 8))],
            sets: vec![(DyadicSet::new(1, [0]).unwrap(), ratio(1, 8))],
        };
        let out = conjugate_into_neighborhood(&Naturals::default(), &src, &spec).unwrap();
        assert!(out.conjugator.is_identity());
    }

    #[test]
    fn full_product_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let space = Naturals::default();
        let t = DyadicMpt::random_full_cycle(8, &mut rng);
        let center = TildeElement::new(
            StepFn::new(1, vec![p("(0 1)"), p("(1 2 3)")]).unwrap(),
            DyadicMpt::random_with_cycle_lengths(8, &[128, 64, 64], &mut rng).unwrap(),
        );
        let eps = ratio(1, 8);
        let spec = ProductSpec::<Naturals> {
            center,
            values: vec![(0, eps.clone()), (1, eps.clone())],
            sets: vec![(DyadicSet::new(2, [0, 3]).unwrap(), eps.clone())],
        };
        let plan = plan_density(&spec);
        let sigma = power_surrogate(2 * plan.window + 1, plan.height, 2).unwrap();
        let src = TildeElement::constant(sigma, t);
        let out = conjugate_into_neighborhood(&space, &src, &spec).unwrap();
        assert!(out.residuals.all_positive());
        assert!(spec.contains(&space, &out.image));
    }

    #[test]
    fn constant_fiber_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = DyadicMpt::random_full_cycle(6, &mut rng);
        let s = DyadicMpt::random_full_cycle(6, &mut rng);
        let out = approx_conjugate_constant(&Naturals::default(), &p("(0 1)"), &t, &s, &ratio(1, 8)).unwrap();
        assert_eq!(out.lu, zero());
        assert!(out.exact);
        let same = approx_conjugate_constant(&Naturals::default(), &p("(0 1)"), &t, &t, &ratio(1, 8)).unwrap();
        assert!(same.conjugator.base.is_identity());
    }

    #[test]
    fn classes_round_trip() {
        let a = p("(0 1 2)");
        let b = p("(0 3)");
        let both = interleave(&[a.clone(), b.clone()]);
        assert_eq!(class_part(&both, 2, 0).unwrap(), a);
        assert_eq!(class_part(&both, 2, 1).unwrap(), b);
        assert!(class_part(&p("(0 1)"), 2, 0).is_none());
    }

    #[test]
    fn two_coordinates_on_separate_classes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let space = Naturals::default();
        let t = DyadicMpt::random_full_cycle(8, &mut rng);
        let s = DyadicMpt::random_full_cycle(8, &mut rng);
        let eps = ratio(1, 8);
        let local_sigma = power_surrogate(5, 32, 2).unwrap();
        let mut sources = Vec::new();
        let mut targets = Vec::new();
        for j in 0..2 {
            let fiber = StepFn::new(1, vec![p("(0 1)"), p("(0 1 2)")]).unwrap().map(|v| interleave_single(v, 2, j));
            sources.push(TildeElement::constant(interleave_single(&local_sigma, 2, j), t.clone()));
            targets.push(ProductSpec::<Naturals> {
                center: TildeElement::new(fiber, s.clone()),
                values: vec![(j as u32, eps.clone()), (2 + j as u32, eps.clone())],
                sets: vec![(DyadicSet::new(1, [0]).unwrap(), eps.clone())],
            });
        }
        let rep = diagonal_experiment(&space, &sources, &targets).unwrap();
        assert!(rep.success(), "{:?}", rep.coordinates);
        let mut bad = targets.clone();
        bad[1].values = vec![(0, eps.clone())];
        assert!(matches!(diagonal_experiment(&space, &sources, &bad), Err(Error::SimultaneousMatchUnsupported(_))));
    }
}
