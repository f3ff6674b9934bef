//! Conjugator synthesis over a Rokhlin tower for permutations of the
//! naturals.
//!
//! Given `σ`, an aperiodic `S` and a step function `h`, builds `g` with
//! `g(x)·h(x)(n) = σ·g(S₀⁻¹x)(n)` for all `n < K` and every tower point `x`,
//! where `S₀` is a period-`N` approximation of `S`.

use std::collections::BTreeMap;

use num_traits::One;

use crate::dyadic::{periodic_approximation, DyadicMpt, ExactTower, TowerData};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::groups::{power_surrogate, PartialInjection, PowerCycles, WindowPerm};
use crate::l0::StepFn;
use crate::rational::{dyadic, fmt as qfmt, ratio, Q};

/// `h(S₀^{N-1}x) ⋯ h(S₀x)·h(x)` along the column whose base is `x`.
pub fn tower_product<G: Group>(h: &StepFn<G>, tower: &ExactTower, x: usize) -> Result<G> {
    tower.validate()?;
    if h.level() > tower.level {
        return Err(Error::Invalid(format!(
            "step function at level {} is finer than the tower at level {}",
            h.level(),
            tower.level
        )));
    }
    let column = tower
        .columns
        .iter()
        .find(|c| c[0] == x)
        .ok_or_else(|| Error::NotExactTower(format!("interval {x} is not a base interval")))?;
    let h = h.refine(tower.level);
    Ok(column_product(&h, column))
}

fn column_product<G: Group>(h: &StepFn<G>, column: &[usize]) -> G {
    column.iter().fold(G::identity(), |acc, &i| h.value(i).mul(&acc))
}

#[derive(Debug, Clone)]
pub struct SynthesisTask {
    /// The permutation playing `σ`; sized from `K` and `N` when absent.
    pub sigma: Option<WindowPerm>,
    pub s: DyadicMpt,
    pub target: StepFn<WindowPerm>,
    /// Number `K` of constrained points `0..K`.
    pub window: usize,
    /// Tower height `N`.
    pub height: usize,
    pub eps: Q,
    /// Cap on the copies per cycle length when `σ` is sized automatically.
    pub max_copies: usize,
}

/// Cycle budget of an automatically sized `σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurrogateBudget {
    pub max_len: usize,
    pub copies: usize,
}

/// One evaluation of the commutation equation at a tower point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationCheck {
    pub column: usize,
    pub level: usize,
    pub n: u32,
    /// `g(x)(h(x)(n))`.
    pub lhs: u32,
    /// `σ(g(S₀⁻¹x)(n))`.
    pub rhs: u32,
    pub ok: bool,
}

/// `g(top)⁻¹ σ^N g(top)(n)` against the tower product of the column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TelescopeCheck {
    pub column: usize,
    pub n: u32,
    pub lhs: u32,
    pub rhs: u32,
    pub ok: bool,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub g: StepFn<WindowPerm>,
    pub sigma: WindowPerm,
    pub budget: Option<SurrogateBudget>,
    pub s0: DyadicMpt,
    pub tower: TowerData,
    pub exact: ExactTower,
    /// `Δᵤ(S, S₀)`.
    pub distance: Q,
    /// Measure of the points where the equation holds with `S` in place of
    /// `S₀`.
    pub agreement: Q,
    pub equations: Vec<EquationCheck>,
    pub telescoping: Vec<TelescopeCheck>,
}

impl SynthesisResult {
    pub fn all_ok(&self) -> bool {
        self.equations.iter().all(|c| c.ok) && self.telescoping.iter().all(|c| c.ok)
    }
}

/// The tower product `f` of a column restricted to the points where the
/// base value must conjugate `σ^N` onto it: `0..K` and `P⁻¹(0..K)` for
/// `P = h(x_{N-2}) ⋯ h(x_0)`.
fn column_constraint(h: &StepFn<WindowPerm>, column: &[usize], k: usize) -> PartialInjection {
    let f = column_product(h, column);
    let below_top = column_product(h, &column[..column.len() - 1]).inverse();
    let mut target = PartialInjection::new();
    for n in 0..k as u32 {
        target.insert(n, f.apply(n));
        let m = below_top.apply(n);
        target.insert(m, f.apply(m));
    }
    target
}

fn match_all(power: &PowerCycles, targets: &[PartialInjection]) -> Result<BTreeMap<PartialInjection, WindowPerm>> {
    let mut out = BTreeMap::new();
    for t in targets {
        if !out.contains_key(t) {
            out.insert(t.clone(), power.match_target(t)?);
        }
    }
    Ok(out)
}

pub fn synthesize_conjugator(task: &SynthesisTask) -> Result<SynthesisResult> {
    let (k, n) = (task.window, task.height);
    if k == 0 || n == 0 {
        return Err(Error::Invalid("window and height must be positive".into()));
    }
    let half = &task.eps / ratio(2, 1);
    let pa = periodic_approximation(&task.s, n, &half)?;
    let level = pa.exact.level.max(task.target.level());
    let exact = pa.exact.refine(level);
    let s0 = exact.periodic_map();
    let h = task.target.refine(level);

    let targets: Vec<PartialInjection> = exact.columns.iter().map(|c| column_constraint(&h, c, k)).collect();

    let (sigma, budget, rhos) = match &task.sigma {
        Some(sigma) => {
            let rhos = match_all(&PowerCycles::new(sigma, n), &targets)?;
            (sigma.clone(), None, rhos)
        }
        None => {
            let max_len = 2 * k + 1;
            let mut copies = 1;
            loop {
                let sigma = power_surrogate(max_len, n, copies)?;
                match match_all(&PowerCycles::new(&sigma, n), &targets) {
                    Ok(rhos) => break (sigma, Some(SurrogateBudget { max_len, copies }), rhos),
                    Err(Error::InsufficientCycles { .. }) if copies * 2 <= task.max_copies => copies *= 2,
                    Err(e) => return Err(e),
                }
            }
        }
    };

    let mut values = vec![WindowPerm::identity(); 1usize << level];
    for (column, target) in exact.columns.iter().zip(&targets) {
        let rho = rhos[target].clone();
        let top = column[n - 1];
        let mut prev = rho.clone();
        for &x in &column[..n - 1] {
            let gx = sigma.compose(&prev).compose(&h.value(x).inverse());
            values[x] = gx.clone();
            prev = gx;
        }
        values[top] = rho;
    }
    let g = StepFn::new(level, values).expect("one value per interval");

    let equations = check_commutation(&sigma, &g, &h, &exact, k);
    let telescoping = check_telescoping(&sigma, &g, &h, &exact, k);
    if let Some(bad) = equations.iter().find(|c| !c.ok) {
        return Err(Error::OracleFailure {
            component: "synthesis".into(),
            reason: format!("equation fails at column {} level {} point {}", bad.column, bad.level, bad.n),
        });
    }
    if let Some(bad) = telescoping.iter().find(|c| !c.ok) {
        return Err(Error::OracleFailure {
            component: "synthesis".into(),
            reason: format!("telescoping fails at column {} point {}", bad.column, bad.n),
        });
    }
    let agreement = agreement_measure(&sigma, &g, &h, &task.s, k);
    if agreement < Q::one() - &task.eps {
        return Err(Error::ToleranceNotMet { achieved: qfmt(&(Q::one() - &agreement)), tolerance: qfmt(&task.eps) });
    }
    Ok(SynthesisResult {
        g,
        sigma,
        budget,
        distance: task.s.delta_u(&s0),
        s0,
        tower: pa.tower,
        exact,
        agreement,
        equations,
        telescoping,
    })
}

/// Evaluates `g(x)(h(x)(n))` against `σ(g(S₀⁻¹x)(n))` at every tower point
/// and every `n < K`.
pub fn check_commutation(
    sigma: &WindowPerm,
    g: &StepFn<WindowPerm>,
    h: &StepFn<WindowPerm>,
    tower: &ExactTower,
    k: usize,
) -> Vec<EquationCheck> {
    let g = g.refine(tower.level);
    let h = h.refine(tower.level);
    let mut out = Vec::with_capacity(tower.columns.len() * tower.height * k);
    for (ci, column) in tower.columns.iter().enumerate() {
        for (level, &x) in column.iter().enumerate() {
            let prev = column[(level + column.len() - 1) % column.len()];
            for n in 0..k as u32 {
                let lhs = g.value(x).apply(h.value(x).apply(n));
                let rhs = sigma.apply(g.value(prev).apply(n));
                out.push(EquationCheck { column: ci, level, n, lhs, rhs, ok: lhs == rhs });
            }
        }
    }
    out
}

/// Composes the equation around each column: `g(top)⁻¹ σ^N g(top)(n)`
/// must equal the tower product at `n < K`.
pub fn check_telescoping(
    sigma: &WindowPerm,
    g: &StepFn<WindowPerm>,
    h: &StepFn<WindowPerm>,
    tower: &ExactTower,
    k: usize,
) -> Vec<TelescopeCheck> {
    let g = g.refine(tower.level);
    let h = h.refine(tower.level);
    let power = sigma.pow(tower.height as u32);
    let mut out = Vec::with_capacity(tower.columns.len() * k);
    for (ci, column) in tower.columns.iter().enumerate() {
        let top = g.value(column[column.len() - 1]);
        let conj = top.inverse().compose(&power.compose(top));
        let f = column_product(&h, column);
        for n in 0..k as u32 {
            let (lhs, rhs) = (conj.apply(n), f.apply(n));
            out.push(TelescopeCheck { column: ci, n, lhs, rhs, ok: lhs == rhs });
        }
    }
    out
}

/// `μ{x : g(x)(h(x)(n)) = σ(g(S⁻¹x)(n)) for all n < K}`.
pub fn agreement_measure(
    sigma: &WindowPerm,
    g: &StepFn<WindowPerm>,
    h: &StepFn<WindowPerm>,
    s: &DyadicMpt,
    k: usize,
) -> Q {
    let level = g.level().max(h.level()).max(s.level());
    let g = g.refine(level);
    let h = h.refine(level);
    let s_inv = s.refine(level).inverse();
    let good = (0..1usize << level)
        .filter(|&x| {
            let prev = g.value(s_inv.apply(x));
            (0..k as u32).all(|n| g.value(x).apply(h.value(x).apply(n)) == sigma.apply(prev.apply(n)))
        })
        .count();
    dyadic(good, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::one;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(s: &str) -> WindowPerm {
        s.parse().unwrap()
    }

    #[test]
    fn product_order_follows_the_column() {
        let tower = ExactTower { level: 2, height: 3, columns: vec![vec![0, 1, 2], vec![3, 3, 3]] };
        assert!(tower_product(&StepFn::<WindowPerm>::identity(), &tower, 0).is_err());
        let tower = ExactTower { level: 2, height: 4, columns: vec![vec![0, 1, 2, 3]] };
        let (a, b, c) = (p("(0 1)"), p("(1 2)"), p("(0 2)"));
        let h = StepFn::new(2, vec![a.clone(), b.clone(), c.clone(), WindowPerm::identity()]).unwrap();
        let expect = c.compose(&b).compose(&a);
        assert_eq!(tower_product(&h, &tower, 0).unwrap(), expect);
        let single = ExactTower { level: 1, height: 1, columns: vec![vec![0], vec![1]] };
        let h = StepFn::new(1, vec![a.clone(), b]).unwrap();
        assert_eq!(tower_product(&h, &single, 0).unwrap(), a);
        assert!(matches!(tower_product(&h, &single, 3), Err(Error::NotExactTower(_))));
    }

    fn random_task(seed: u64, level: u32, k: usize, n: usize) -> SynthesisTask {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = DyadicMpt::random_full_cycle(level, &mut rng);
        let target = StepFn::random(3, &mut rng, |r| {
            let mut map: Vec<u32> = (0..8).collect();
            for i in (1..8).rev() {
                map.swap(i, r.gen_range(0..=i));
            }
            WindowPerm::new(map).unwrap()
        });
        SynthesisTask { sigma: None, s, target, window: k, height: n, eps: ratio(2, n as i64), max_copies: 8 }
    }

    #[test]
    fn random_targets_satisfy_the_equation() {
        for seed in 0..4 {
            let task = random_task(seed, 8, 4, 8);
            let res = synthesize_conjugator(&task).unwrap();
            assert!(res.all_ok());
            assert_eq!(res.equations.len(), 256 * 4);
            assert!(res.agreement >= one() - &task.eps);
            assert!(res.agreement >= one() - &res.distance);
        }
    }

    #[test]
    fn trivial_target() {
        let mut task = random_task(1, 6, 3, 4);
        task.target = StepFn::identity();
        let res = synthesize_conjugator(&task).unwrap();
        assert!(res.all_ok());
        assert!(res.agreement >= one() - &res.distance);
    }

    #[test]
    fn explicit_sigma_can_run_short() {
        let mut task = random_task(2, 6, 4, 4);
        task.sigma = Some(p("(0 1)"));
        assert!(matches!(synthesize_conjugator(&task), Err(Error::InsufficientCycles { .. })));
    }

    #[test]
    fn periodic_input_is_rejected() {
        let mut task = random_task(3, 6, 2, 4);
        task.s = DyadicMpt::identity_at(6);
        assert!(matches!(synthesize_conjugator(&task), Err(Error::NotAperiodic { .. })));
    }
}
