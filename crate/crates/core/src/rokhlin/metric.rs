//! Conjugator synthesis for a base group with a right-invariant metric and a
//! power-matching oracle.

use num_traits::One;

use crate::dyadic::{match_cycle_type, periodic_approximation, DyadicMpt, ExactTower, TowerData};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::groups::{GroupMetric, PartialInjection, PowerCycles, WindowPerm};
use crate::l0::{ConjugacyOracle, StepFn};
use crate::rational::{dyadic, fmt as qfmt, max, ratio, Q};

/// Matches the cycle type of the source by cutting and closing the target's
/// cycles; exact when the target already has that cycle type.
#[derive(Debug, Clone, Copy, Default)]
pub struct CycleTypeOracle;

impl ConjugacyOracle<DyadicMpt> for CycleTypeOracle {
    fn conjugator(&self, g: &DyadicMpt, target: &DyadicMpt, tol: &Q) -> Result<DyadicMpt> {
        let (r, approx) = match_cycle_type(g, target);
        let achieved = approx.delta_u(target);
        if achieved > *tol {
            return Err(Error::ToleranceNotMet { achieved: qfmt(&achieved), tolerance: qfmt(tol) });
        }
        Ok(r)
    }
}

/// Exact conjugacy of window permutations on the union of both windows.
#[derive(Debug, Clone, Copy, Default)]
pub struct WindowOracle;

impl ConjugacyOracle<WindowPerm> for WindowOracle {
    fn conjugator(&self, g: &WindowPerm, target: &WindowPerm, _tol: &Q) -> Result<WindowPerm> {
        let w = g.window().max(target.window()) as u32;
        let full: PartialInjection = (0..w).map(|n| (n, target.apply(n))).collect();
        let rho = PowerCycles::from_power(g.clone()).match_target(&full)?;
        if g.conj(&rho) != *target {
            return Err(Error::OracleFailure {
                component: "window".into(),
                reason: "conjugate moves points outside the target window".into(),
            });
        }
        Ok(rho)
    }
}

/// Deviation `d_u(g(x)⁻¹ σ g(S₀⁻¹x), h(x))` at one tower point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeviationCheck {
    pub column: usize,
    pub level: usize,
    pub deviation: Q,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct MetricSynthesisResult<G> {
    pub g: StepFn<G>,
    pub s0: DyadicMpt,
    pub tower: TowerData,
    pub exact: ExactTower,
    pub distance: Q,
    pub max_deviation: Q,
    /// Measure of the points where the deviation with `S` in place of `S₀`
    /// is at most `ε_G`.
    pub agreement: Q,
    pub deviations: Vec<DeviationCheck>,
}

/// `h(x)·h(S₀^{N-1}x) ⋯ h(S₀x)` for the column starting at `x`.
fn rotated_product<G: Group>(h: &StepFn<G>, column: &[usize]) -> G {
    let rest = column[1..].iter().fold(G::identity(), |acc, &i| h.value(i).mul(&acc));
    h.value(column[0]).mul(&rest)
}

/// Base values `ρ` with `d(ρ⁻¹ σ^N ρ, h(x)h(S₀^{N-1}x)⋯h(S₀x)) ≤ ε_G` on each
/// column, extended by `g(S₀ⁱx) = σ g(S₀^{i-1}x) h(S₀ⁱx)⁻¹`.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_conjugator_metric<G, M, O>(
    metric: &M,
    oracle: &O,
    sigma: &G,
    s: &DyadicMpt,
    target: &StepFn<G>,
    height: usize,
    eps: &Q,
    eps_g: &Q,
) -> Result<MetricSynthesisResult<G>>
where
    G: Group,
    M: GroupMetric<G> + ?Sized,
    O: ConjugacyOracle<G> + ?Sized,
{
    if height == 0 {
        return Err(Error::Invalid("height must be positive".into()));
    }
    let pa = periodic_approximation(s, height, &(eps / ratio(2, 1)))?;
    let level = pa.exact.level.max(target.level());
    let exact = pa.exact.refine(level);
    let s0 = exact.periodic_map();
    let h = target.refine(level);
    let power = sigma.pow(height as u32);

    let mut values = vec![G::identity(); 1usize << level];
    let mut cache: Vec<(G, G)> = Vec::new();
    for column in &exact.columns {
        let t = rotated_product(&h, column);
        let rho = match cache.iter().find(|(k, _)| *k == t) {
            Some((_, rho)) => rho.clone(),
            None => {
                let rho = oracle
                    .conjugator(&power, &t, eps_g)
                    .map_err(|e| Error::OracleFailure { component: "power matching".into(), reason: e.to_string() })?;
                cache.push((t, rho.clone()));
                rho
            }
        };
        let mut prev = rho.clone();
        values[column[0]] = rho;
        for &x in &column[1..] {
            let gx = sigma.mul(&prev).mul(&h.value(x).inv());
            values[x] = gx.clone();
            prev = gx;
        }
    }
    let g = StepFn::new(level, values).expect("one value per interval");

    let deviations = check_deviation(metric, sigma, &g, &h, &exact, eps_g);
    let max_deviation = deviations.iter().fold(Q::default(), |acc, d| max(&acc, &d.deviation));
    if let Some(bad) = deviations.iter().find(|d| !d.ok) {
        return Err(Error::OracleFailure {
            component: "synthesis".into(),
            reason: format!("deviation {} at column {} level {}", qfmt(&bad.deviation), bad.column, bad.level),
        });
    }
    let agreement = metric_agreement(metric, sigma, &g, &h, s, eps_g);
    if agreement < Q::one() - eps {
        return Err(Error::ToleranceNotMet { achieved: qfmt(&(Q::one() - &agreement)), tolerance: qfmt(eps) });
    }
    Ok(MetricSynthesisResult {
        g,
        distance: s.delta_u(&s0),
        s0,
        tower: pa.tower,
        exact,
        max_deviation,
        agreement,
        deviations,
    })
}

fn deviation_at<G: Group, M: GroupMetric<G> + ?Sized>(metric: &M, sigma: &G, gx: &G, gprev: &G, hx: &G) -> Q {
    metric.d_u(&gx.inv().mul(sigma).mul(gprev), hx)
}

pub fn check_deviation<G: Group, M: GroupMetric<G> + ?Sized>(
    metric: &M,
    sigma: &G,
    g: &StepFn<G>,
    h: &StepFn<G>,
    tower: &ExactTower,
    eps_g: &Q,
) -> Vec<DeviationCheck> {
    let g = g.refine(tower.level);
    let h = h.refine(tower.level);
    let mut out = Vec::with_capacity(1usize << tower.level);
    for (ci, column) in tower.columns.iter().enumerate() {
        for (level, &x) in column.iter().enumerate() {
            let prev = column[(level + column.len() - 1) % column.len()];
            let deviation = deviation_at(metric, sigma, g.value(x), g.value(prev), h.value(x));
            let ok = deviation <= *eps_g;
            out.push(DeviationCheck { column: ci, level, deviation, ok });
        }
    }
    out
}

fn metric_agreement<G: Group, M: GroupMetric<G> + ?Sized>(
    metric: &M,
    sigma: &G,
    g: &StepFn<G>,
    h: &StepFn<G>,
    s: &DyadicMpt,
    eps_g: &Q,
) -> Q {
    let level = g.level().max(h.level()).max(s.level());
    let g = g.refine(level);
    let h = h.refine(level);
    let s_inv = s.refine(level).inverse();
    let good = (0..1usize << level)
        .filter(|&x| deviation_at(metric, sigma, g.value(x), g.value(s_inv.apply(x)), h.value(x)) <= *eps_g)
        .count();
    dyadic(good, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{MptMetric, PermMetric};
    use crate::rational::{one, zero};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_target_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sigma = DyadicMpt::random_full_cycle(6, &mut rng);
        let s = DyadicMpt::random_full_cycle(5, &mut rng);
        let res = synthesize_conjugator_metric(
            &MptMetric,
            &CycleTypeOracle,
            &sigma,
            &s,
            &StepFn::identity(),
            4,
            &ratio(1, 2),
            &ratio(1, 8),
        );
        // σ⁴ has four 16-cycles, so the identity is far from its class.
        assert!(matches!(res, Err(Error::OracleFailure { .. })));
        let res = synthesize_conjugator_metric(
            &MptMetric,
            &CycleTypeOracle,
            &sigma,
            &s,
            &StepFn::identity(),
            4,
            &ratio(1, 2),
            &one(),
        )
        .unwrap();
        assert!(res.deviations.iter().all(|d| d.ok));
    }

    #[test]
    fn full_cycle_targets_within_tolerance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sigma = DyadicMpt::random_full_cycle(10, &mut rng);
        let s = DyadicMpt::random_full_cycle(5, &mut rng);
        let h = StepFn::random(2, &mut rng, |r| DyadicMpt::random_full_cycle(8, r));
        let eps_g = ratio(1, 8);
        let res = synthesize_conjugator_metric(&MptMetric, &CycleTypeOracle, &sigma, &s, &h, 4, &ratio(1, 2), &eps_g)
            .unwrap();
        assert!(res.max_deviation <= eps_g);
        assert!(res.agreement >= one() - ratio(1, 2));
    }

    #[test]
    fn window_oracle_is_exact() {
        let sigma: WindowPerm = "(0 1 2 3 4 5)(6 7)".parse().unwrap();
        let target: WindowPerm = "(0 1 2)(3 4 5)".parse().unwrap();
        let rho = WindowOracle.conjugator(&sigma.pow(2), &target, &zero()).unwrap();
        assert_eq!(sigma.pow(2).conj(&rho), target);
        let s = DyadicMpt::shift(3, 1);
        let h = StepFn::constant(target);
        let res =
            synthesize_conjugator_metric(&PermMetric, &WindowOracle, &sigma, &s, &h, 2, &ratio(1, 2), &zero()).unwrap();
        assert_eq!(res.max_deviation, zero());
    }
}
