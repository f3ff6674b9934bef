//! The pointwise-convergence metric and the neighbourhood translations
//! between the pointwise and product topologies.

use num_traits::Zero;
use rand::Rng;

use crate::dyadic::{DyadicMpt, DyadicSet};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::groups::IsometrySpace;
use crate::l0::StepFn;
use crate::rational::{pow2_inv, ratio, GeometricSum, Q};
use crate::tilde::element::{dhat_x, TildeElement};

/// Coarsest level of the canonical test functions.
pub const TEST_FUNCTION_MAX_LEVEL: u32 = 3;

/// The canonical test functions: step functions at levels `0..=3` with
/// values among the marked points, each listed once at its coarsest level,
/// in order of level and then lexicographically.
pub fn test_functions<S: IsometrySpace>(space: &S) -> impl Iterator<Item = StepFn<S::Point>> + '_ {
    let pts = space.marked_points();
    let k = pts.len();
    (0..=TEST_FUNCTION_MAX_LEVEL).flat_map(move |level| {
        let n = 1usize << level;
        let total = k.pow(n as u32);
        let pts = pts.clone();
        (0..total).filter_map(move |code| {
            let mut c = code;
            let digits: Vec<usize> = (0..n)
                .map(|_| {
                    let d = c % k;
                    c /= k;
                    d
                })
                .rev()
                .collect();
            let coarser = level > 0 && digits.chunks(2).all(|w| w[0] == w[1]);
            (!coarser).then(|| StepFn::new(level, digits.iter().map(|&d| pts[d].clone()).collect()).expect("length"))
        })
    })
}

/// `Σ_{m < budget} 2^-(m+1) d̂(a·α_m, b·α_m)` over the canonical test
/// functions. The omitted tail is at most `2^-budget`.
pub fn pointwise_metric<S: IsometrySpace>(
    space: &S,
    a: &TildeElement<S::Iso>,
    b: &TildeElement<S::Iso>,
    budget: usize,
) -> Q {
    let mut acc = GeometricSum::new();
    for alpha in test_functions(space).take(budget) {
        acc.push(dhat_x(space, &a.act(space, &alpha), &b.act(space, &alpha)));
    }
    acc.total()
}

/// Bound on the part of the series [`pointwise_metric`] leaves out.
pub fn truncation_bound(budget: usize) -> Q {
    pow2_inv(budget as u32)
}

/// A basic neighbourhood of the product topology: `U × W` with
/// `U = {g : ∫ d(f(ω)a, g(ω)a) dω < r_a}` over the value conditions and
/// `W = {R : μ(T(A) △ R(A)) < r_A}` over the set conditions.
#[derive(Debug, Clone)]
pub struct ProductSpec<S: IsometrySpace> {
    pub center: TildeElement<S::Iso>,
    pub values: Vec<(S::Point, Q)>,
    pub sets: Vec<(DyadicSet, Q)>,
}

/// A basic neighbourhood of the pointwise topology:
/// `{x : d̂(center·α, x·α) < r_α}` over the test functions.
#[derive(Debug, Clone)]
pub struct PointwiseSpec<S: IsometrySpace> {
    pub center: TildeElement<S::Iso>,
    pub tests: Vec<(StepFn<S::Point>, Q)>,
}

/// Distance of `g` from `f` at the point `a`: `∫ d(f(ω)a, g(ω)a) dω`.
pub fn value_deviation<S: IsometrySpace>(space: &S, f: &StepFn<S::Iso>, g: &StepFn<S::Iso>, a: &S::Point) -> Q {
    f.integrate_distance(g, |x, y| space.dist(&space.act(x, a), &space.act(y, a)))
}

/// `μ(T(A) △ R(A))`.
pub fn set_deviation(t: &DyadicMpt, r: &DyadicMpt, set: &DyadicSet) -> Q {
    t.image(set).symmetric_difference(&r.image(set)).measure()
}

/// Per-condition slack: radius minus the measured deviation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residuals {
    pub values: Vec<Q>,
    pub sets: Vec<Q>,
}

impl Residuals {
    pub fn all_positive(&self) -> bool {
        self.values.iter().chain(&self.sets).all(|r| *r > Q::zero())
    }
}

impl<S: IsometrySpace> ProductSpec<S> {
    pub fn residuals(&self, space: &S, x: &TildeElement<S::Iso>) -> Residuals {
        Residuals {
            values: self
                .values
                .iter()
                .map(|(a, r)| r - value_deviation(space, &self.center.fiber, &x.fiber, a))
                .collect(),
            sets: self.sets.iter().map(|(set, r)| r - set_deviation(&self.center.base, &x.base, set)).collect(),
        }
    }

    pub fn contains(&self, space: &S, x: &TildeElement<S::Iso>) -> bool {
        self.residuals(space, x).all_positive()
    }
}

impl<S: IsometrySpace> PointwiseSpec<S> {
    pub fn residuals(&self, space: &S, x: &TildeElement<S::Iso>) -> Vec<Q> {
        self.tests
            .iter()
            .map(|(alpha, r)| r - dhat_x(space, &self.center.act(space, alpha), &x.act(space, alpha)))
            .collect()
    }

    pub fn contains(&self, space: &S, x: &TildeElement<S::Iso>) -> bool {
        self.residuals(space, x).iter().all(|r| *r > Q::zero())
    }
}

/// Outcome of testing sampled elements against a containment claim.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Certificate {
    pub sampled: usize,
    /// Samples that fell inside the smaller neighbourhood.
    pub members: usize,
    /// Members that failed the larger neighbourhood's condition.
    pub violations: usize,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Random element near `center`: the fiber is changed on a set of measure
/// about `2^-j` and the base is composed with a permutation moving about
/// `2^-j` of the intervals, for a random `j` in `1..=depth`.
pub fn sample_near<S: IsometrySpace, R: Rng + ?Sized>(
    space: &S,
    center: &TildeElement<S::Iso>,
    depth: u32,
    rng: &mut R,
) -> TildeElement<S::Iso> {
    let level = center.level().max(depth + 2);
    let j = rng.gen_range(1..=depth);
    let n = 1usize << level;
    let moved = (n >> j).max(1);
    let fiber = center.fiber.refine(level);
    let mut values = fiber.values().to_vec();
    for _ in 0..moved {
        let i = rng.gen_range(0..n);
        values[i] = space.random_iso(rng).mul(&values[i]);
    }
    let mut perm: Vec<usize> = (0..n).collect();
    let picks: Vec<usize> = (0..moved.min(n)).map(|_| rng.gen_range(0..n)).collect();
    for w in picks.windows(2) {
        perm.swap(w[0], w[1]);
    }
    let shuffle = DyadicMpt::new(level, perm.into_iter().map(|v| v as u32).collect()).expect("permutation");
    TildeElement {
        fiber: StepFn::new(level, values).expect("length"),
        base: center.base.refine(level).compose(&shuffle),
    }
}

/// `α = Σ a_i χ_{A_i}` as value/set pairs, in order of first appearance.
pub fn pieces<P: Clone + Eq>(alpha: &StepFn<P>) -> Vec<(P, DyadicSet)> {
    let mut out: Vec<(P, Vec<usize>)> = Vec::new();
    for (i, v) in alpha.values().iter().enumerate() {
        match out.iter_mut().find(|(p, _)| p == v) {
            Some((_, idx)) => idx.push(i),
            None => out.push((v.clone(), vec![i])),
        }
    }
    out.into_iter().map(|(p, idx)| (p, DyadicSet::new(alpha.level(), idx).expect("in range"))).collect()
}

/// Product neighbourhood inside the pointwise ball
/// `{x : d̂(center·α, x·α) < ε}`: with `α = Σ_{i≤k} a_i χ_{A_i}`, the value
/// conditions at each `a_i` and the set conditions at each `A_i` all get
/// radius `ε/(2k)`.
pub fn nbhd_product_to_pointwise<S: IsometrySpace>(
    center: &TildeElement<S::Iso>,
    alpha: &StepFn<S::Point>,
    eps: &Q,
) -> ProductSpec<S> {
    let parts = pieces(&alpha.coarsen());
    let r = eps / ratio(2 * parts.len() as i64, 1);
    ProductSpec {
        center: center.clone(),
        values: parts.iter().map(|(a, _)| (a.clone(), r.clone())).collect(),
        sets: parts.into_iter().map(|(_, set)| (set, r.clone())).collect(),
    }
}

/// Samples near the center; every sample inside `spec` must lie in the
/// pointwise ball of radius `eps` at `alpha`.
pub fn certify_product_to_pointwise<S: IsometrySpace, R: Rng + ?Sized>(
    space: &S,
    spec: &ProductSpec<S>,
    alpha: &StepFn<S::Point>,
    eps: &Q,
    samples: usize,
    rng: &mut R,
) -> Certificate {
    let ball = PointwiseSpec { center: spec.center.clone(), tests: vec![(alpha.clone(), eps.clone())] };
    let mut cert = Certificate { sampled: samples, ..Certificate::default() };
    for _ in 0..samples {
        let x = sample_near(space, &spec.center, 8, rng);
        if spec.contains(space, &x) {
            cert.members += 1;
            if !ball.contains(space, &x) {
                cert.violations += 1;
            }
        }
    }
    cert
}

/// Pointwise neighbourhoods inside the product conditions of the second
/// neighbourhood lemma.
#[derive(Debug, Clone)]
pub struct PointwiseToProduct<S: IsometrySpace> {
    /// `β₁, β₂` at radius `εs/4`; members satisfy `μ(T(B) △ R(B)) < ε`.
    pub aut_part: PointwiseSpec<S>,
    /// `γ = α ∘ T` at radius `ε/2` together with the pairs `β₁, β₂` built on
    /// the sets `T⁻¹(A_i)` at radius `(ε/2k)·s/4`; members satisfy
    /// `∫ d(f(ω)α(ω), g(ω)α(ω)) dω < ε`.
    pub fiber_part: PointwiseSpec<S>,
    pub separation: Q,
}

fn beta_pair<P: Clone>(set: &DyadicSet, c1: &P, c2: &P) -> (StepFn<P>, StepFn<P>) {
    let b1 = StepFn::constant(c1.clone());
    let b2 = StepFn::from_fn(set.level(), |i| if set.contains(i) { c1.clone() } else { c2.clone() });
    (b1, b2)
}

pub fn nbhd_pointwise_to_product<S: IsometrySpace>(
    space: &S,
    center: &TildeElement<S::Iso>,
    set: &DyadicSet,
    alpha: &StepFn<S::Point>,
    eps: &Q,
    c1: &S::Point,
    c2: &S::Point,
) -> Result<PointwiseToProduct<S>> {
    let s = space.dist(c1, c2);
    if s.is_zero() {
        return Err(Error::DegenerateSpace);
    }
    let four = ratio(4, 1);
    let (b1, b2) = beta_pair(set, c1, c2);
    let r_aut = eps * &s / &four;
    let aut_part = PointwiseSpec { center: center.clone(), tests: vec![(b1, r_aut.clone()), (b2, r_aut)] };

    let parts = pieces(&alpha.coarsen());
    let k = parts.len() as i64;
    let t_inv = center.base.inverse();
    let gamma = alpha.pullback(&center.base);
    let mut tests = vec![(gamma, eps / ratio(2, 1))];
    let r_set = eps / ratio(2 * k, 1) * &s / &four;
    for (_, a_i) in &parts {
        let (b1, b2) = beta_pair(&t_inv.image(a_i), c1, c2);
        tests.push((b1, r_set.clone()));
        tests.push((b2, r_set.clone()));
    }
    Ok(PointwiseToProduct { aut_part, fiber_part: PointwiseSpec { center: center.clone(), tests }, separation: s })
}

/// Samples near the center and checks both containments of the second
/// neighbourhood lemma.
pub fn certify_pointwise_to_product<S: IsometrySpace, R: Rng + ?Sized>(
    space: &S,
    nb: &PointwiseToProduct<S>,
    set: &DyadicSet,
    alpha: &StepFn<S::Point>,
    eps: &Q,
    samples: usize,
    rng: &mut R,
) -> (Certificate, Certificate) {
    let center = &nb.aut_part.center;
    let mut aut = Certificate { sampled: samples, ..Certificate::default() };
    let mut fib = Certificate { sampled: samples, ..Certificate::default() };
    for _ in 0..samples {
        let x = sample_near(space, center, 8, rng);
        if nb.aut_part.contains(space, &x) {
            aut.members += 1;
            if set_deviation(&center.base, &x.base, set) >= *eps {
                aut.violations += 1;
            }
        }
        if nb.fiber_part.contains(space, &x) {
            fib.members += 1;
            let fixed_alpha = |e: &TildeElement<S::Iso>| TildeElement::from_fiber(e.fiber.clone()).act(space, alpha);
            if dhat_x(space, &fixed_alpha(center), &fixed_alpha(&x)) >= *eps {
                fib.violations += 1;
            }
        }
    }
    (aut, fib)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FiniteSpace, Naturals, WindowPerm};
    use crate::rational::{one, zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enumeration_skips_coarser_duplicates() {
        let x = FiniteSpace::on_line(&[zero(), one()]).unwrap();
        let all: Vec<_> = test_functions(&x).collect();
        // 2 + (4-2) + (16-4) + (256-16)
        assert_eq!(all.len(), 256);
        assert_eq!(all[0], StepFn::constant(0));
        assert_eq!(all[2].level(), 1);
    }

    #[test]
    fn metric_values() {
        let sp = Naturals::default();
        let e = TildeElement::<WindowPerm>::identity();
        assert_eq!(pointwise_metric(&sp, &e, &e, 32), zero());
        let t = TildeElement::from_base(DyadicMpt::shift(2, 1));
        let d = pointwise_metric(&sp, &e, &t, 32);
        assert!(d > zero() && d <= one());
        let d16 = pointwise_metric(&sp, &e, &t, 16);
        assert!(d16 <= &d + truncation_bound(16));
        assert!(d16 <= d);
    }

    #[test]
    fn product_inside_pointwise() {
        let sp = Naturals::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let center = TildeElement::<WindowPerm>::identity();
        let alpha = StepFn::new(1, vec![0u32, 1]).unwrap();
        let eps = ratio(1, 4);
        let spec = nbhd_product_to_pointwise::<Naturals>(&center, &alpha, &eps);
        assert!(spec.values.iter().all(|(_, r)| *r == ratio(1, 16)));
        let cert = certify_product_to_pointwise(&sp, &spec, &alpha, &eps, 100, &mut rng);
        assert!(cert.passed() && cert.members > 0, "{cert:?}");
        let constant = StepFn::constant(2u32);
        let spec = nbhd_product_to_pointwise::<Naturals>(&center, &constant, &eps);
        assert_eq!(spec.values, vec![(2, ratio(1, 8))]);
    }

    #[test]
    fn pointwise_inside_product() {
        let sp = Naturals::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let center = TildeElement::new(
            StepFn::new(1, vec!["(0 1)".parse::<WindowPerm>().unwrap(), WindowPerm::identity()]).unwrap(),
            DyadicMpt::shift(3, 1),
        );
        let set = DyadicSet::new(2, [0, 1]).unwrap();
        let alpha = StepFn::new(2, vec![0u32, 1, 1, 2]).unwrap();
        let eps = ratio(1, 4);
        let nb = nbhd_pointwise_to_product(&sp, &center, &set, &alpha, &eps, &0, &1).unwrap();
        assert_eq!(nb.aut_part.tests[0].1, ratio(1, 16));
        let (a, f) = certify_pointwise_to_product(&sp, &nb, &set, &alpha, &eps, 100, &mut rng);
        assert!(a.passed() && f.passed(), "{a:?} {f:?}");
        assert!(a.members > 0 && f.members > 0);
        assert!(matches!(
            nbhd_pointwise_to_product(&sp, &center, &set, &alpha, &eps, &0, &0),
            Err(Error::DegenerateSpace)
        ));
    }
}
