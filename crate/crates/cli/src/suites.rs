//! The acceptance criteria, each with a pinned sample size, tolerance and
//! runtime limit.

use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use randiso::dyadic::{periodic_approximation, DyadicMpt, DyadicSet};
use randiso::groups::{
    power_cycle_type, power_surrogate, FiniteSpace, IsometrySpace, MptMetric, Naturals, PermMetric, PlOrderAut,
    PowerInvariance, WindowPerm,
};
use randiso::l0::{dhat, dhat_u, lsc_probe, StepFn};
use randiso::rational::{dyadic, fmt as qfmt, ratio, Q};
use randiso::rokhlin::{
    aperiodic_lift, approx_conjugate_constant, conjugate_into_neighborhood, plan_density, synthesize_conjugator,
    synthesize_conjugator_metric, CycleTypeOracle, SynthesisTask,
};
use randiso::tilde::{dhat_x, lu_bounds, lu_estimate, lu_exact_discrete, ProductSpec, TildeElement};
use randiso::Group;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn perm<R: Rng>(rng: &mut R, max_window: usize) -> WindowPerm {
    let w = rng.gen_range(0..=max_window);
    let mut map: Vec<u32> = (0..w as u32).collect();
    map.shuffle(rng);
    WindowPerm::new(map).expect("shuffled range")
}

fn perm_step<R: Rng>(rng: &mut R, level: u32, max_window: usize) -> StepFn<WindowPerm> {
    StepFn::random(level, rng, |r| perm(r, max_window))
}

/// A permutation of the level-`level` intervals moving a random subset.
fn partial_mpt<R: Rng>(rng: &mut R, level: u32) -> DyadicMpt {
    let n = 1usize << level;
    let moved: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
    let mut images = moved.clone();
    images.shuffle(rng);
    let mut p: Vec<u32> = (0..n as u32).collect();
    for (&from, &to) in moved.iter().zip(&images) {
        p[from] = to as u32;
    }
    DyadicMpt::new(level, p).expect("permutation")
}

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

/// Equality as functions on `[0,1]`.
fn same<V: Clone + PartialEq>(a: &StepFn<V>, b: &StepFn<V>) -> bool {
    let l = a.level().max(b.level());
    a.refine(l) == b.refine(l)
}

fn metric_axioms() -> Outcome {
    const TRIPLES: u64 = 500;
    const MAX_LEVEL: u32 = 8;
    const MAX_WINDOW: usize = 16;
    for seed in 0..TRIPLES {
        let mut r = rng(seed);
        let pick = |r: &mut ChaCha8Rng| {
            let level = r.gen_range(0..=MAX_LEVEL);
            perm_step(r, level, MAX_WINDOW)
        };
        let (f, g, h) = (pick(&mut r), pick(&mut r), pick(&mut r));
        for (name, d) in [
            ("d̂", dhat::<WindowPerm, PermMetric> as fn(&PermMetric, &_, &_) -> Q),
            ("d̂ᵤ", dhat_u::<WindowPerm, PermMetric>),
        ] {
            let m = &PermMetric;
            ensure(d(m, &f, &f).is_zero(), || format!("seed {seed}: {name}(f, f) ≠ 0"))?;
            ensure(d(m, &f, &g) == d(m, &g, &f), || format!("seed {seed}: {name} not symmetric"))?;
            ensure(d(m, &f, &h) <= d(m, &f, &g) + d(m, &g, &h), || format!("seed {seed}: {name} triangle"))?;
            ensure(d(m, &f, &g).is_zero() == same(&f, &g), || format!("seed {seed}: {name} separation"))?;
        }
        ensure(dhat(&PermMetric, &f, &g) <= dhat_u(&PermMetric, &f, &g), || format!("seed {seed}: d̂ > d̂ᵤ"))?;
    }
    Ok(format!("{TRIPLES} triples"))
}

fn lower_semicontinuity() -> Outcome {
    const SEQUENCES: u64 = 100;
    const LENGTH: u32 = 8;
    const FAR: u32 = 16;
    for seed in 0..SEQUENCES {
        let mut r = rng(1000 + seed);
        let level = r.gen_range(1..=4);
        let f = perm_step(&mut r, level, 8);
        let h_level = r.gen_range(0..=4);
        let h = perm_step(&mut r, h_level, 8);
        // seq_k(ω) = f(ω)·(M+k M+k+1), so d_p(seq_k(ω), f(ω)) halves with k.
        let seq: Vec<_> = (0..LENGTH)
            .map(|k| {
                let far = FAR + k;
                let swap = WindowPerm::from_cycles(&[vec![far, far + 1]]).expect("transposition");
                f.map(|v| v.mul(&swap))
            })
            .collect();
        let rep = lsc_probe(&PermMetric, &f, &h, &seq, &ratio(1, 8)).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(rep.holds, || {
            format!("seed {seed}: d̂ᵤ(f,h) = {} > tail min {}", qfmt(&rep.limit_value), qfmt(&rep.tail_min))
        })?;
        ensure(rep.witness_holds, || format!("seed {seed}: witness inequality fails"))?;
    }
    Ok(format!("{SEQUENCES} sequences"))
}

fn discrete_formula() -> Outcome {
    const PAIRS: u64 = 200;
    const LEVEL: u32 = 6;
    const SLACK: (i64, i64) = (1, 64);
    const SAMPLES: u64 = 8;
    const BUDGET: usize = 4;
    let space = Naturals::default();
    let slack = ratio(SLACK.0, SLACK.1);
    for seed in 0..PAIRS {
        let mut r = rng(2000 + seed);
        let f = StepFn::random(LEVEL, &mut r, |r| if r.gen_bool(0.5) { WindowPerm::identity() } else { perm(r, 6) });
        let t = partial_mpt(&mut r, LEVEL);
        let oracle =
            dyadic((0..1usize << LEVEL).filter(|&i| !f.value(i).is_identity() || t.apply(i) != i).count(), LEVEL);
        let a = TildeElement::new(f, t);
        let e = TildeElement::identity();
        let exact = lu_exact_discrete(&space, &a, &e).map_err(|e| e.to_string())?;
        ensure(exact == oracle, || format!("seed {seed}: exact {} ≠ {}", qfmt(&exact), qfmt(&oracle)))?;
        let est = lu_estimate(&space, &a, &e, BUDGET, seed);
        ensure(est >= &exact - &slack, || format!("seed {seed}: estimate {} below {}", qfmt(&est), qfmt(&exact)))?;
        for s in 0..SAMPLES {
            let mut sr = rng(seed * 100 + s);
            let alpha = StepFn::random(LEVEL, &mut sr, |r| space.random_point(r));
            let d = dhat_x(&space, &a.act(&space, &alpha), &e.act(&space, &alpha));
            ensure(d <= exact, || format!("seed {seed}: sampled α gives {} > {}", qfmt(&d), qfmt(&exact)))?;
        }
    }
    Ok(format!("{PAIRS} pairs, slack {}/{}", SLACK.0, SLACK.1))
}

fn sandwich() -> Outcome {
    const PAIRS: u64 = 200;
    const BUDGET: usize = 4;
    let space = FiniteSpace::on_line(&[Q::zero(), ratio(1, 2), Q::one()]).map_err(|e| e.to_string())?;
    let rand_elem = |r: &mut ChaCha8Rng| {
        let level = r.gen_range(0..=5);
        let fiber = StepFn::random(level, r, |r| space.random_iso(r));
        let base_level = r.gen_range(0..=5);
        let base = if r.gen_bool(0.5) { partial_mpt(r, base_level) } else { DyadicMpt::identity_at(0) };
        TildeElement::new(fiber, base)
    };
    for seed in 0..PAIRS {
        let mut r = rng(3000 + seed);
        let (a, b) = (rand_elem(&mut r), rand_elem(&mut r));
        let bounds = lu_bounds(&space, &a, &b).map_err(|e| e.to_string())?;
        ensure(bounds.r.is_one(), || "anchor distance is not 1".into())?;
        let est = lu_estimate(&space, &a, &b, BUDGET, seed);
        ensure(bounds.lower <= est && est <= bounds.upper, || {
            format!("seed {seed}: {} ≤ {} ≤ {} fails", qfmt(&bounds.lower), qfmt(&est), qfmt(&bounds.upper))
        })?;
        ensure(bounds.max_lower <= bounds.lower && bounds.max_lower <= est, || format!("seed {seed}: max form"))?;
        ensure(bounds.upper <= bounds.product_sum, || format!("seed {seed}: upper exceeds product sum"))?;
        ensure(bounds.product_max <= bounds.product_sum, || format!("seed {seed}: max above sum"))?;
    }
    Ok(format!("{PAIRS} pairs, r = 1"))
}

fn periodic() -> Outcome {
    let mut cases = 0;
    for level in 8..=12u32 {
        for n in [4usize, 8, 16, 32] {
            let mut r = rng(4000 + (level as u64) * 64 + n as u64);
            let t = DyadicMpt::random_full_cycle(level, &mut r);
            let bound = ratio(1, n as i64);
            let pa = periodic_approximation(&t, n, &bound).map_err(|e| format!("level {level}, N {n}: {e}"))?;
            ensure(pa.distance <= bound && t.delta_u(&pa.s0) == pa.distance, || {
                format!("level {level}, N {n}: Δᵤ = {}", qfmt(&pa.distance))
            })?;
            ensure(pa.s0.cycles().iter().all(|c| c.len() == n), || format!("level {level}, N {n}: cycle length"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases"))
}

fn synthesis() -> Outcome {
    const TARGETS: u64 = 50;
    const MAX_COPIES: usize = 8;
    for seed in 0..TARGETS {
        let mut r = rng(5000 + seed);
        let k = r.gen_range(1..=8usize);
        let n = [4usize, 8, 16][r.gen_range(0..3)];
        let s = DyadicMpt::random_full_cycle(r.gen_range(6..=10), &mut r);
        let target = StepFn::random(r.gen_range(0..=2), &mut r, |r| {
            let mut m: Vec<u32> = (0..k as u32).collect();
            m.shuffle(r);
            WindowPerm::new(m).expect("shuffle")
        });
        let task = SynthesisTask {
            sigma: None,
            s,
            target,
            window: k,
            height: n,
            eps: ratio(2, n as i64),
            max_copies: MAX_COPIES,
        };
        let res = synthesize_conjugator(&task).map_err(|e| format!("seed {seed}: {e}"))?;
        let level = res.exact.level;
        ensure(level <= 12, || format!("seed {seed}: level {level}"))?;
        ensure(res.agreement >= Q::one() - &task.eps, || format!("seed {seed}: agreement {}", qfmt(&res.agreement)))?;
        ensure(res.equations.len() == (1usize << level) * k && res.equations.iter().all(|c| c.ok), || {
            format!("seed {seed}: commutation checks")
        })?;
        ensure(res.telescoping.len() == res.exact.columns.len() * k && res.telescoping.iter().all(|c| c.ok), || {
            format!("seed {seed}: telescoping checks")
        })?;
    }
    Ok(format!("{TARGETS} targets, ε = 2/N"))
}

fn metric_synthesis() -> Outcome {
    const TASKS: u64 = 20;
    let eps_g = ratio(1, 8);
    for seed in 0..TASKS {
        let mut r = rng(6000 + seed);
        let sigma = DyadicMpt::random_full_cycle(10, &mut r);
        let s = DyadicMpt::random_full_cycle(r.gen_range(5..=8), &mut r);
        let h = StepFn::random(2, &mut r, |r| DyadicMpt::random_full_cycle(8, r));
        let res = synthesize_conjugator_metric(&MptMetric, &CycleTypeOracle, &sigma, &s, &h, 4, &ratio(1, 2), &eps_g)
            .map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(res.deviations.len() == 1usize << res.exact.level, || format!("seed {seed}: coverage"))?;
        ensure(res.deviations.iter().all(|d| d.deviation <= eps_g), || {
            format!("seed {seed}: max deviation {}", qfmt(&res.max_deviation))
        })?;
    }
    Ok(format!("{TASKS} tasks, ε_G = 1/8"))
}

fn density() -> Outcome {
    const TARGETS: u64 = 50;
    const RADII: [i64; 3] = [4, 8, 16];
    let space = Naturals::default();
    for seed in 0..TARGETS {
        let mut r = rng(7000 + seed);
        let eps = ratio(1, RADII[r.gen_range(0..RADII.len())]);
        let level = r.gen_range(6..=8);
        let center_base = match r.gen_range(0..3) {
            0 => DyadicMpt::random_full_cycle(level, &mut r),
            1 => {
                let n = 1usize << level;
                DyadicMpt::random_with_cycle_lengths(level, &[n / 2, n / 4, n / 4], &mut r).expect("lengths")
            }
            _ => DyadicMpt::random(level, &mut r),
        };
        let fiber_level = r.gen_range(0..=2);
        let center = TildeElement::new(perm_step(&mut r, fiber_level, 3), center_base.clone());
        let values = (0..r.gen_range(1..=2u32)).map(|a| (a, eps.clone())).collect();
        let set_level = r.gen_range(1..=3);
        let set = DyadicSet::new(set_level, (0..1usize << set_level).filter(|_| r.gen_bool(0.5))).expect("in range");
        let spec = ProductSpec::<Naturals> { center, values, sets: vec![(set, eps.clone())] };
        let plan = plan_density(&spec);
        let sigma = power_surrogate(2 * plan.window + 1, plan.height, 2).map_err(|e| e.to_string())?;
        let t = DyadicMpt::random_full_cycle(r.gen_range(level..=10), &mut r);
        let src = TildeElement::constant(sigma, t.clone());
        let out = conjugate_into_neighborhood(&space, &src, &spec).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(spec.contains(&space, &out.image), || format!("seed {seed}: image outside the neighbourhood"))?;

        let h = perm(&mut r, 6);
        let goal = aperiodic_lift(&center_base, level, 7);
        let cc = approx_conjugate_constant(&space, &h, &t, &goal, &eps)
            .map_err(|e| format!("seed {seed}: constant conjugacy: {e}"))?;
        ensure(cc.exact && cc.lu < eps, || format!("seed {seed}: Lᵤ = {}", qfmt(&cc.lu)))?;
    }
    Ok(format!("{TARGETS} targets, ε ≥ 1/16"))
}

/// Every permutation of `0..w` in lexicographic order.
fn all_perms(w: usize) -> Vec<Vec<u32>> {
    let mut cur: Vec<u32> = (0..w as u32).collect();
    let mut out = vec![cur.clone()];
    loop {
        let Some(i) = (1..w).rev().find(|&i| cur[i - 1] < cur[i]) else {
            return out;
        };
        let j = (i..w).rev().find(|&j| cur[j] > cur[i - 1]).expect("successor");
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

fn power_invariants() -> Outcome {
    const EXHAUSTIVE_WINDOW: usize = 6;
    const MAX_WINDOW: usize = 64;
    const MAX_POWER: usize = 12;
    const SAMPLES_PER_WINDOW: u64 = 4;
    const PL_SAMPLES: u64 = 100;
    let check = |p: &WindowPerm, n: usize| -> Result<(), String> {
        let direct = p.pow(n as u32).with_window(p.window()).census();
        ensure(power_cycle_type(p, n) == direct, || format!("{p} to the {n}"))
    };
    let mut count = 0;
    for w in 0..=EXHAUSTIVE_WINDOW {
        for map in all_perms(w) {
            let p = WindowPerm::new(map).expect("permutation");
            for n in 1..=MAX_POWER {
                check(&p, n)?;
                count += 1;
            }
        }
    }
    for w in EXHAUSTIVE_WINDOW + 1..=MAX_WINDOW {
        for s in 0..SAMPLES_PER_WINDOW {
            let mut r = rng(8000 + (w as u64) * 16 + s);
            let mut map: Vec<u32> = (0..w as u32).collect();
            map.shuffle(&mut r);
            let p = WindowPerm::new(map).expect("permutation");
            for n in 1..=MAX_POWER {
                check(&p, n)?;
                count += 1;
            }
        }
    }
    for seed in 0..PL_SAMPLES {
        let mut r = rng(9000 + seed);
        let g = PlOrderAut::random(4, &mut r);
        for n in 1..=5 {
            ensure(g.power_report(n).invariant(), || format!("seed {seed}: orbitals of g^{n} differ"))?;
        }
    }
    Ok(format!("{count} cycle types, {PL_SAMPLES} PL automorphisms"))
}

fn group_laws() -> Outcome {
    const TUPLES: u64 = 300;
    let space = Naturals::default();
    let elem = |r: &mut ChaCha8Rng| {
        let (fiber_level, base_level) = (r.gen_range(0..=3), r.gen_range(0..=3));
        let fiber = perm_step(r, fiber_level, 5);
        let base = DyadicMpt::random(base_level, r);
        TildeElement::new(fiber, base)
    };
    for seed in 0..TUPLES {
        let mut r = rng(10_000 + seed);
        let (a, b, c) = (elem(&mut r), elem(&mut r), elem(&mut r));
        let e = TildeElement::<WindowPerm>::identity();
        let fail = |law: &str| format!("seed {seed}: {law}");
        ensure(a.mul(&b).mul(&c) == a.mul(&b.mul(&c)), || fail("associativity"))?;
        ensure(a.mul(&e) == a && e.mul(&a) == a, || fail("identity"))?;
        ensure(a.mul(&a.inv()).is_identity(), || fail("inverse"))?;

        let level = r.gen_range(0..=4);
        let alpha = StepFn::random(level, &mut r, |r| space.random_point(r));
        let beta = StepFn::random(level, &mut r, |r| space.random_point(r));
        ensure(same(&e.act(&space, &alpha), &alpha), || fail("identity action"))?;
        ensure(same(&a.mul(&b).act(&space, &alpha), &a.act(&space, &b.act(&space, &alpha))), || fail("action"))?;
        ensure(dhat_x(&space, &a.act(&space, &alpha), &a.act(&space, &beta)) == dhat_x(&space, &alpha, &beta), || {
            fail("isometry")
        })?;

        let lu = |x: &TildeElement<WindowPerm>, y: &TildeElement<WindowPerm>| {
            lu_exact_discrete(&space, x, y).expect("discrete")
        };
        let d = lu(&a, &b);
        ensure(lu(&c.mul(&a), &c.mul(&b)) == d, || fail("left invariance"))?;
        ensure(lu(&a.mul(&c), &b.mul(&c)) == d, || fail("right invariance"))?;
    }
    Ok(format!("{TUPLES} tuples"))
}

pub struct Criterion {
    pub id: usize,
    pub name: &'static str,
    pub limit: Duration,
    run: fn() -> Outcome,
}

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl Criterion {
    pub fn run(&self) -> CriterionOutcome {
        let start = Instant::now();
        let outcome = (self.run)();
        let elapsed = start.elapsed();
        let (passed, detail) = match outcome {
            Ok(detail) if elapsed > self.limit => (false, format!("{detail}; exceeded {:?}", self.limit)),
            Ok(detail) => (true, detail),
            Err(why) => (false, why),
        };
        CriterionOutcome { id: self.id, name: self.name, passed, detail, elapsed }
    }
}

impl std::fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} {:>2} {} ({}, {:.2?})", self.id, self.name, self.detail, self.elapsed)
    }
}

pub fn criteria() -> Vec<Criterion> {
    let table: [(&'static str, u64, fn() -> Outcome); 10] = [
        ("metric axioms and uniform refinement", 10, metric_axioms),
        ("lower semicontinuity", 10, lower_semicontinuity),
        ("exact discrete formula", 60, discrete_formula),
        ("sandwich and product bounds", 60, sandwich),
        ("periodic approximation", 5, periodic),
        ("conjugator synthesis", 120, synthesis),
        ("metric-group synthesis", 120, metric_synthesis),
        ("density two-step", 60, density),
        ("power invariants", 30, power_invariants),
        ("group laws and bi-invariance", 30, group_laws),
    ];
    table
        .into_iter()
        .enumerate()
        .map(|(i, (name, secs, run))| Criterion { id: i + 1, name, limit: Duration::from_secs(secs), run })
        .collect()
}
