use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use randiso::dyadic::{periodic_approximation, rokhlin_tower, DyadicMpt};
use randiso::groups::{
    match_on_window, GroupMetric, IsometrySpace, Naturals, PartialInjection, PermMetric, PlOrderAut, PowerInvariance,
    WindowPerm,
};
use randiso::l0::{dhat, dhat_u, StepFn};
use randiso::rational::{one, ratio};
use randiso::rokhlin::{synthesize_conjugator, SynthesisTask};
use randiso::tilde::{dhat_x, lu_bounds, lu_estimate, lu_exact_discrete, TildeElement};
use randiso::Group;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn perm<R: Rng>(r: &mut R, max_window: usize) -> WindowPerm {
    let mut map: Vec<u32> = (0..r.gen_range(0..=max_window) as u32).collect();
    map.shuffle(r);
    WindowPerm::new(map).unwrap()
}

fn mpt<R: Rng>(r: &mut R) -> DyadicMpt {
    let level = r.gen_range(0..=5);
    DyadicMpt::random(level, r)
}

fn perm_step<R: Rng>(r: &mut R) -> StepFn<WindowPerm> {
    let level = r.gen_range(0..=4);
    StepFn::random(level, r, |r| perm(r, 6))
}

fn element<R: Rng>(r: &mut R) -> TildeElement<WindowPerm> {
    let fiber = perm_step(r);
    TildeElement::new(fiber, mpt(r))
}

fn point_step<R: Rng>(r: &mut R, space: &Naturals) -> StepFn<u32> {
    let level = r.gen_range(0..=4);
    StepFn::random(level, r, |r| space.random_point(r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mpt_group_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (mpt(&mut r), mpt(&mut r), mpt(&mut r));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert!(a.mul(&a.inv()).is_identity());
        prop_assert_eq!(a.mul(&DyadicMpt::identity()), a.clone());
    }

    #[test]
    fn uniform_distance_is_bi_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (t, s, a, b) = (mpt(&mut r), mpt(&mut r), mpt(&mut r), mpt(&mut r));
        let d = t.delta_u(&s);
        prop_assert_eq!(a.mul(&t).mul(&b).delta_u(&a.mul(&s).mul(&b)), d.clone());
        let u = mpt(&mut r);
        prop_assert!(t.delta_u(&u) <= &d + s.delta_u(&u));
        prop_assert!(ratio(2, 3) * &d <= t.delta_u_sup(&s) && t.delta_u_sup(&s) <= d);
    }

    #[test]
    fn refinement_preserves_mpt_quantities(seed in any::<u64>(), extra in 0u32..3) {
        let mut r = rng(seed);
        let (t, s) = (mpt(&mut r), mpt(&mut r));
        let (tf, sf) = (t.refine(t.level() + extra), s.refine(s.level() + extra));
        prop_assert_eq!(tf.delta_u(&sf), t.delta_u(&s));
        prop_assert_eq!(tf.delta_u_sup(&sf), t.delta_u_sup(&s));
        prop_assert_eq!(tf.cycle_profile(), t.cycle_profile());
    }

    #[test]
    fn towers_are_disjoint_and_small(seed in any::<u64>(), height in 2usize..9) {
        let mut r = rng(seed);
        let level = r.gen_range(5..=8);
        let t = DyadicMpt::random_full_cycle(level, &mut r);
        let eps = ratio(1, 4);
        let tower = rokhlin_tower(&t, height, &eps).unwrap();
        for i in 0..tower.levels.len() {
            for j in i + 1..tower.levels.len() {
                prop_assert!(tower.levels[i].is_disjoint(&tower.levels[j]));
            }
            prop_assert!(tower.levels[i].is_disjoint(&tower.leftover));
        }
        prop_assert!(tower.leftover.measure() <= eps);
        if let Ok(pa) = periodic_approximation(&t, height, &eps) {
            prop_assert!(pa.s0.cycles().iter().all(|c| c.len() == height));
            prop_assert!(pa.distance <= &eps + ratio(1, height as i64));
        }
    }

    #[test]
    fn permutation_metrics(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b, c) = (perm(&mut r, 12), perm(&mut r, 12), perm(&mut r, 12));
        let m = PermMetric;
        prop_assert_eq!(m.d_p(&a, &b), m.d_p(&b, &a));
        prop_assert!(m.d_p(&a, &c) <= m.d_p(&a, &b) + m.d_p(&b, &c));
        prop_assert_eq!(m.d_p(&a, &b).is_zero(), a == b);
        prop_assert!(m.d_p(&a, &b) <= m.d_u(&a, &b));
        prop_assert_eq!(m.d_u(&a.mul(&c), &b.mul(&c)), m.d_u(&a, &b));
    }

    #[test]
    fn window_matching_postcondition(seed in any::<u64>(), power in 1usize..5) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=5u32);
        let target = perm(&mut r, k as usize);
        let sigma = randiso::groups::power_surrogate(2 * k as usize + 1, power, 2).unwrap();
        let wanted: PartialInjection = (0..k).map(|n| (n, target.apply(n))).collect();
        let rho = match_on_window(&sigma, power, &wanted).unwrap();
        let conj = sigma.pow(power as u32).conj(&rho);
        for (&n, &m) in &wanted {
            prop_assert_eq!(conj.apply(n), m);
        }
    }

    #[test]
    fn pl_orbitals_survive_powers(seed in any::<u64>(), power in 1usize..=5) {
        let g = PlOrderAut::random(6, &mut rng(seed));
        prop_assert!(g.power_report(power).invariant());
    }

    #[test]
    fn step_metrics_are_bi_invariant(seed in any::<u64>(), extra in 0u32..3) {
        let mut r = rng(seed);
        let (f, h, a, b) = (perm_step(&mut r), perm_step(&mut r), perm_step(&mut r), perm_step(&mut r));
        let d = dhat_u(&PermMetric, &f, &h);
        prop_assert_eq!(dhat_u(&PermMetric, &a.mul(&f).mul(&b), &a.mul(&h).mul(&b)), d.clone());
        prop_assert!(dhat(&PermMetric, &f, &h) <= d.clone());
        let (ff, hf) = (f.refine(f.level() + extra), h.refine(h.level() + extra));
        prop_assert_eq!(dhat_u(&PermMetric, &ff, &hf), d);
        prop_assert_eq!(dhat(&PermMetric, &ff, &hf), dhat(&PermMetric, &f, &h));
    }

    #[test]
    fn action_laws(seed in any::<u64>()) {
        let space = Naturals::default();
        let mut r = rng(seed);
        let (a, b) = (element(&mut r), element(&mut r));
        let (alpha, beta) = (point_step(&mut r, &space), point_step(&mut r, &space));
        let both = a.product(&b).act(&space, &alpha);
        let level = both.level().max(alpha.level() + a.level() + b.level());
        prop_assert_eq!(both.refine(level), a.act(&space, &b.act(&space, &alpha)).refine(level));
        let back = a.inverse().act(&space, &a.act(&space, &alpha));
        let level = back.level().max(alpha.level());
        prop_assert_eq!(back.refine(level), alpha.refine(level));
        prop_assert_eq!(
            dhat_x(&space, &a.act(&space, &alpha), &a.act(&space, &beta)),
            dhat_x(&space, &alpha, &beta)
        );
    }

    #[test]
    fn uniform_metric_on_the_randomization(seed in any::<u64>()) {
        let space = Naturals::default();
        let mut r = rng(seed);
        let (a, b, c, c2) = (element(&mut r), element(&mut r), element(&mut r), element(&mut r));
        let lu = |x: &TildeElement<WindowPerm>, y: &TildeElement<WindowPerm>| lu_exact_discrete(&space, x, y).unwrap();
        let d = lu(&a, &b);
        prop_assert_eq!(lu(&c.mul(&a).mul(&c2), &c.mul(&b).mul(&c2)), d.clone());
        prop_assert!(lu(&a, &c) <= &d + lu(&b, &c));
        let est = lu_estimate(&space, &a, &b, 2, seed);
        let bounds = lu_bounds(&space, &a, &b).unwrap();
        prop_assert!(est <= d && d <= bounds.upper);
        prop_assert!(bounds.max_lower <= bounds.lower && bounds.upper <= bounds.product_sum);
    }

    #[test]
    fn synthesis_equations_hold(seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = r.gen_range(1..=4usize);
        let height = [2usize, 4, 8][r.gen_range(0..3)];
        let level = r.gen_range(4..=7);
        let s = DyadicMpt::random_full_cycle(level, &mut r);
        let target = StepFn::random(r.gen_range(0..=2), &mut r, |r| perm(r, k));
        let task = SynthesisTask {
            sigma: None,
            s,
            target,
            window: k,
            height,
            eps: ratio(2, height as i64),
            max_copies: 8,
        };
        let res = synthesize_conjugator(&task).unwrap();
        prop_assert!(res.all_ok());
        prop_assert!(res.agreement >= one() - &task.eps);
        prop_assert!(res.agreement >= one() - &res.distance);
        prop_assert!(res.distance <= task.eps);
    }

    #[test]
    fn tilde_text_round_trips(seed in any::<u64>()) {
        let x = element(&mut rng(seed));
        prop_assert_eq!(x.to_string().parse::<TildeElement<WindowPerm>>().unwrap(), x);
    }
}
