//! Step functions on `[0,1)` with the integrated metrics `d̂` and `d̂ᵤ`.

use std::fmt;

use num_traits::{One, Zero};
use rand::Rng;

use crate::dyadic::{DyadicMpt, DyadicSet};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::groups::GroupMetric;
use crate::rational::{dyadic, fmt as qfmt, sum, Q};

/// A function on `[0,1)` constant on each interval of a dyadic partition.
#[derive(Debug, Clone)]
pub struct StepFn<V> {
    level: u32,
    values: Vec<V>,
}

impl<V: Clone> StepFn<V> {
    pub fn new(level: u32, values: Vec<V>) -> Result<Self> {
        if values.len() != 1usize << level {
            return Err(Error::Invalid(format!(
                "level {level} needs {} values, got {}",
                1usize << level,
                values.len()
            )));
        }
        Ok(Self { level, values })
    }

    pub fn constant(v: V) -> Self {
        Self { level: 0, values: vec![v] }
    }

    pub fn from_fn(level: u32, f: impl FnMut(usize) -> V) -> Self {
        Self { level, values: (0..1usize << level).map(f).collect() }
    }

    pub fn random<R: Rng + ?Sized>(level: u32, rng: &mut R, mut gen: impl FnMut(&mut R) -> V) -> Self {
        Self { level, values: (0..1usize << level).map(|_| gen(rng)).collect() }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &V {
        &self.values[i]
    }

    /// The same function at level `m ≥ level`.
    pub fn refine(&self, m: u32) -> Self {
        assert!(m >= self.level, "refinement must not coarsen");
        let f = 1usize << (m - self.level);
        Self { level: m, values: self.values.iter().flat_map(|v| std::iter::repeat_n(v.clone(), f)).collect() }
    }

    pub fn map<W>(&self, f: impl FnMut(&V) -> W) -> StepFn<W> {
        StepFn { level: self.level, values: self.values.iter().map(f).collect() }
    }

    /// Intervalwise combination at the common level.
    pub fn zip_with<U: Clone, W>(&self, other: &StepFn<U>, mut f: impl FnMut(&V, &U) -> W) -> StepFn<W> {
        let m = self.level.max(other.level);
        let a = self.refine(m);
        let b = other.refine(m);
        StepFn { level: m, values: a.values.iter().zip(&b.values).map(|(x, y)| f(x, y)).collect() }
    }

    /// `∫ d(f(ω), h(ω)) dω` for a pointwise distance `d`.
    pub fn integrate_distance<U: Clone>(&self, other: &StepFn<U>, mut d: impl FnMut(&V, &U) -> Q) -> Q {
        let m = self.level.max(other.level);
        let per = self.zip_with(other, |a, b| d(a, b));
        sum(per.values.iter()) * dyadic(1, m)
    }

    /// Measure of `{ω : pred(f(ω))}`.
    pub fn measure_where(&self, mut pred: impl FnMut(&V) -> bool) -> Q {
        dyadic(self.values.iter().filter(|v| pred(v)).count(), self.level)
    }

    pub fn set_where(&self, mut pred: impl FnMut(&V) -> bool) -> DyadicSet {
        DyadicSet::new(self.level, (0..self.values.len()).filter(|&i| pred(&self.values[i]))).expect("in range")
    }

    /// `f ∘ T⁻¹`: the value on interval `T(i)` is the old value on `i`.
    pub fn pushforward(&self, t: &DyadicMpt) -> Self {
        let m = self.level.max(t.level());
        let f = self.refine(m);
        let t = t.refine(m);
        let mut values = f.values.clone();
        for (i, v) in f.values.into_iter().enumerate() {
            values[t.apply(i)] = v;
        }
        Self { level: m, values }
    }

    /// `f ∘ T`.
    pub fn pullback(&self, t: &DyadicMpt) -> Self {
        let m = self.level.max(t.level());
        let f = self.refine(m);
        let t = t.refine(m);
        Self { level: m, values: (0..f.values.len()).map(|i| f.values[t.apply(i)].clone()).collect() }
    }
}

impl<V: Clone + PartialEq> StepFn<V> {
    /// The coarsest representation of the same function.
    pub fn coarsen(&self) -> Self {
        let mut out = self.clone();
        while out.level > 0 && out.values.chunks(2).all(|c| c[0] == c[1]) {
            out = Self { level: out.level - 1, values: out.values.chunks(2).map(|c| c[0].clone()).collect() };
        }
        out
    }
}

impl<V: Clone + PartialEq> PartialEq for StepFn<V> {
    fn eq(&self, other: &Self) -> bool {
        let m = self.level.max(other.level);
        self.refine(m).values == other.refine(m).values
    }
}

impl<V: Clone + Eq> Eq for StepFn<V> {}

impl<G: Group> StepFn<G> {
    pub fn identity() -> Self {
        Self::constant(G::identity())
    }

    /// Pointwise product `ω ↦ f(ω)·h(ω)`.
    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, G::mul)
    }

    pub fn inv(&self) -> Self {
        self.map(G::inv)
    }

    /// `ω ↦ by(ω)⁻¹ f(ω) by(ω)`.
    pub fn conj(&self, by: &Self) -> Self {
        self.zip_with(by, G::conj)
    }

    /// Measure of `{ω : f(ω) ≠ e}`.
    pub fn support_measure(&self) -> Q {
        self.measure_where(|g| !g.is_identity())
    }
}

/// `d̂(f, h) = ∫ d_p(f(ω), h(ω)) dω`.
pub fn dhat<G: Clone, M: GroupMetric<G> + ?Sized>(metric: &M, f: &StepFn<G>, h: &StepFn<G>) -> Q {
    f.integrate_distance(h, |a, b| metric.d_p(a, b))
}

/// `d̂ᵤ(f, h) = ∫ d_u(f(ω), h(ω)) dω`.
pub fn dhat_u<G: Clone, M: GroupMetric<G> + ?Sized>(metric: &M, f: &StepFn<G>, h: &StepFn<G>) -> Q {
    f.integrate_distance(h, |a, b| metric.d_u(a, b))
}

impl<V: fmt::Display> fmt::Display for StepFn<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} [", self.level)?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Quantitative data behind the lower semicontinuity of `d̂ᵤ` at `(f, h)`.
///
/// With `ρ` the smallest pointwise radius on `{d_u(f, h) > 0}`, every `f'`
/// satisfies `d̂ᵤ(f', h) ≥ d̂ᵤ(f, h) - d̂(f', f)/ρ`, so the `d̂`-ball of
/// radius `ε/(4N)` with `N = 1/ρ` keeps `d̂ᵤ(·, h)` above
/// `d̂ᵤ(f, h) - ε/4`. The exceptional set is empty at finite resolution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LscWitness {
    pub radius: Q,
    pub n: Q,
    pub ball_radius: Q,
    pub exceptional_measure: Q,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LscReport {
    /// `d̂ᵤ(f, h)`.
    pub limit_value: Q,
    /// `d̂(seq_k, f)` for every k.
    pub approach: Vec<Q>,
    /// `d̂ᵤ(seq_k, h)` for every k.
    pub values: Vec<Q>,
    /// Minimum of `values` over the second half of the sequence.
    pub tail_min: Q,
    /// `limit_value ≤ tail_min`.
    pub holds: bool,
    pub witness: Option<LscWitness>,
    /// Every element obeys the witness inequality.
    pub witness_holds: bool,
}

/// Checks `d̂ᵤ(f, h) ≤ liminf d̂ᵤ(seq_k, h)` along a sequence converging to
/// `f` in `d̂`.
///
/// The sequence must converge at least geometrically: `d̂(seq_k, f) ≤
/// 2^-k · d̂(seq_0, f)`. The liminf is read off the second half of the
/// sequence.
pub fn lsc_probe<G: Clone, M: GroupMetric<G> + ?Sized>(
    metric: &M,
    f: &StepFn<G>,
    h: &StepFn<G>,
    seq: &[StepFn<G>],
    eps: &Q,
) -> Result<LscReport> {
    if seq.is_empty() {
        return Err(Error::NotConverging("empty sequence".into()));
    }
    let approach: Vec<Q> = seq.iter().map(|s| dhat(metric, s, f)).collect();
    for (k, a) in approach.iter().enumerate() {
        if *a > &approach[0] * dyadic(1, k as u32) {
            return Err(Error::NotConverging(format!("d̂(seq_{k}, f) = {} exceeds 2^-{k} d̂(seq_0, f)", qfmt(a))));
        }
    }
    let limit_value = dhat_u(metric, f, h);
    let values: Vec<Q> = seq.iter().map(|s| dhat_u(metric, s, h)).collect();
    let tail_min = values[values.len() / 2..].iter().min().expect("nonempty").clone();
    let witness = lsc_witness(metric, f, h, eps);
    let witness_holds =
        witness.as_ref().is_none_or(|w| approach.iter().zip(&values).all(|(a, v)| *v >= &limit_value - a * &w.n));
    Ok(LscReport { holds: limit_value <= tail_min, limit_value, approach, values, tail_min, witness, witness_holds })
}

/// The witness of [`LscReport`], when the metric supplies pointwise radii.
pub fn lsc_witness<G: Clone, M: GroupMetric<G> + ?Sized>(
    metric: &M,
    f: &StepFn<G>,
    h: &StepFn<G>,
    eps: &Q,
) -> Option<LscWitness> {
    let pairs = f.zip_with(h, |a, b| (a.clone(), b.clone()));
    let mut radius = Q::one();
    for (a, b) in pairs.values() {
        if !metric.d_u(a, b).is_zero() {
            let r = metric.lsc_radius(a, b)?;
            if r < radius {
                radius = r;
            }
        }
    }
    let n = radius.recip();
    Some(LscWitness { ball_radius: eps / (Q::from_integer(4.into()) * &n), radius, n, exceptional_measure: Q::zero() })
}

/// Finds conjugators within a tolerance.
pub trait ConjugacyOracle<G> {
    /// `ρ` with `d_u(ρ⁻¹ g ρ, target) ≤ tol`.
    fn conjugator(&self, g: &G, target: &G, tol: &Q) -> Result<G>;
}

/// A step function `h` with `d̂ᵤ(f, h⁻¹ C_g h) ≤ ε`, choosing each value of
/// `h` independently by the oracle. Each interval must be matched within
/// `ε`.
pub fn constant_generic_conjugator<G: Group, M: GroupMetric<G> + ?Sized, O: ConjugacyOracle<G> + ?Sized>(
    metric: &M,
    oracle: &O,
    g: &G,
    f: &StepFn<G>,
    eps: &Q,
) -> Result<StepFn<G>> {
    let mut cache: Vec<(G, G)> = Vec::new();
    let mut values = Vec::with_capacity(f.values.len());
    for (i, v) in f.values.iter().enumerate() {
        if let Some((_, rho)) = cache.iter().find(|(t, _)| t == v) {
            values.push(rho.clone());
            continue;
        }
        let rho = oracle.conjugator(g, v, eps).map_err(|_| Error::Unmatchable { interval: i })?;
        if metric.d_u(&g.conj(&rho), v) > *eps {
            return Err(Error::Unmatchable { interval: i });
        }
        cache.push((v.clone(), rho.clone()));
        values.push(rho);
    }
    Ok(StepFn { level: f.level, values })
}
