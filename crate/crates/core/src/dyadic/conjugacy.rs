//! Approximate conjugacy between aperiodic interval permutations.

use num_traits::One;

use crate::dyadic::mpt::DyadicMpt;
use crate::dyadic::tower::periodic_approximation;
use crate::error::{Error, Result};
use crate::rational::{fmt as qfmt, Q};

/// A conjugator `R` with `Δᵤ(R⁻¹TR, S) = achieved`.
#[derive(Debug, Clone)]
pub struct ConjugateMatch {
    pub conjugator: DyadicMpt,
    pub height: usize,
    pub achieved: Q,
}

/// `R⁻¹ T R`.
pub fn conjugate_by(t: &DyadicMpt, r: &DyadicMpt) -> DyadicMpt {
    r.inverse().compose(&t.compose(r))
}

/// Finds `R` with `Δᵤ(R⁻¹TR, S) < eps` by matching the columns of
/// period-`N` approximations of both maps, trying every power of two `N`
/// up to the shorter minimal cycle length.
pub fn mpt_conjugate_match(t: &DyadicMpt, s: &DyadicMpt, eps: &Q) -> Result<ConjugateMatch> {
    let shortest = t.min_cycle_len().min(s.min_cycle_len());
    let mut best: Option<ConjugateMatch> = None;
    let mut height = 2;
    while height <= shortest {
        if let Some(m) = match_at_height(t, s, height) {
            if best.as_ref().is_none_or(|b| m.achieved < b.achieved) {
                best = Some(m);
            }
        }
        height *= 2;
    }
    match best {
        Some(m) if m.achieved < *eps => Ok(m),
        Some(m) => Err(Error::ToleranceNotMet { achieved: qfmt(&m.achieved), tolerance: qfmt(eps) }),
        None => Err(Error::NotAperiodic { shortest, required: 2 }),
    }
}

fn match_at_height(t: &DyadicMpt, s: &DyadicMpt, height: usize) -> Option<ConjugateMatch> {
    let whole = Q::one();
    // Towers built at the common level run along whole cycles, so
    // consecutive columns stay consecutive on both sides.
    let common = t.level().max(s.level());
    let ta = periodic_approximation(&t.refine(common), height, &whole).ok()?;
    let sa = periodic_approximation(&s.refine(common), height, &whole).ok()?;
    let level = ta.exact.level.max(sa.exact.level);
    let tt = ta.exact.refine(level);
    let st = sa.exact.refine(level);
    let mut perm = vec![0u32; 1usize << level];
    for (sc, tc) in st.columns.iter().zip(&tt.columns) {
        for (&a, &b) in sc.iter().zip(tc) {
            perm[a] = b as u32;
        }
    }
    let conjugator = DyadicMpt::from_perm_unchecked(level, perm);
    let achieved = conjugate_by(t, &conjugator).delta_u(s);
    Some(ConjugateMatch { conjugator, height, achieved })
}

/// Conjugates `source` onto a map with the same cycle type that is close to
/// `target`.
///
/// The cycles of `target` are laid end to end and cut into consecutive
/// blocks of the cycle lengths of `source`; each block is closed into a
/// cycle of the returned map `P`, and `R` maps block positions onto source
/// cycle positions, so `R⁻¹ · source · R = P` exactly. `P` differs from
/// `target` only at block ends and target cycle ends.
pub fn match_cycle_type(source: &DyadicMpt, target: &DyadicMpt) -> (DyadicMpt, DyadicMpt) {
    let level = source.level().max(target.level());
    let src = source.refine(level);
    let tgt = target.refine(level);
    let order: Vec<usize> = tgt.cycles().into_iter().flatten().collect();
    let n = order.len();
    let mut conj = vec![0u32; n];
    let mut approx = vec![0u32; n];
    let mut at = 0;
    for cycle in src.cycles() {
        let block = &order[at..at + cycle.len()];
        for (j, (&b, &c)) in block.iter().zip(&cycle).enumerate() {
            conj[b] = c as u32;
            approx[b] = block[(j + 1) % block.len()] as u32;
        }
        at += cycle.len();
    }
    (DyadicMpt::from_perm_unchecked(level, conj), DyadicMpt::from_perm_unchecked(level, approx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{dyadic, ratio};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn full_cycle_against_two_half_cycles() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = DyadicMpt::random_full_cycle(8, &mut rng);
        let s = DyadicMpt::random_with_cycle_lengths(8, &[128, 128], &mut rng).unwrap();
        let eps = ratio(1, 8);
        let m = mpt_conjugate_match(&t, &s, &eps).unwrap();
        assert!(m.achieved <= eps);
        assert_eq!(conjugate_by(&t, &m.conjugator).delta_u(&s), m.achieved);
    }

    #[test]
    fn equal_maps_need_no_conjugator() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = DyadicMpt::random_with_cycle_lengths(6, &[32, 16, 16], &mut rng).unwrap();
        let m = mpt_conjugate_match(&t, &t, &ratio(1, 4)).unwrap();
        assert_eq!(m.achieved, ratio(0, 1));
        assert_eq!(m.conjugator, DyadicMpt::identity_at(0));
    }

    #[test]
    fn full_cycles_are_exactly_conjugate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = DyadicMpt::random_full_cycle(7, &mut rng);
        let s = DyadicMpt::random_full_cycle(7, &mut rng);
        let m = mpt_conjugate_match(&t, &s, &ratio(1, 100)).unwrap();
        assert_eq!(conjugate_by(&t, &m.conjugator), s);
    }

    #[test]
    fn tolerance_not_met() {
        let t = DyadicMpt::shift(3, 1);
        let s = DyadicMpt::from_cycles(3, &[(0..4).collect(), (4..8).collect()]).unwrap();
        assert!(matches!(mpt_conjugate_match(&t, &s, &ratio(1, 64)), Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn cut_and_close_is_exact_conjugacy() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let source = DyadicMpt::random_with_cycle_lengths(6, &[16, 16, 16, 16], &mut rng).unwrap();
        let target = DyadicMpt::random_with_cycle_lengths(6, &[40, 24], &mut rng).unwrap();
        let (r, p) = match_cycle_type(&source, &target);
        assert_eq!(conjugate_by(&source, &r), p);
        // four block ends plus two cycle ends, with one shared
        assert!(p.delta_u(&target) <= dyadic(6, 6));
        assert!(p.cycles().iter().all(|c| c.len() == 16));
    }
}
