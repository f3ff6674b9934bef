//! Piecewise-linear order automorphisms of the rationals.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::rational::{fmt as qfmt, int, parse as qparse, ratio, Q};

/// `x ↦ slope·x + offset`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Affine {
    pub slope: Q,
    pub offset: Q,
}

impl Affine {
    pub fn apply(&self, x: &Q) -> Q {
        &self.slope * x + &self.offset
    }

    fn then(&self, outer: &Affine) -> Affine {
        Affine { slope: &outer.slope * &self.slope, offset: &outer.slope * &self.offset + &outer.offset }
    }

    fn inverse(&self) -> Affine {
        let slope = self.slope.recip();
        Affine { offset: -&self.offset * &slope, slope }
    }
}

/// An increasing bijection of ℚ given by affine pieces with positive slopes,
/// continuous at the breakpoints.
///
/// Piece `i` acts on `[breaks[i-1], breaks[i])`, the first piece on
/// everything below `breaks[0]` and the last on everything from the final
/// breakpoint on. Adjacent equal pieces are merged, so equal maps compare
/// equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlOrderAut {
    breaks: Vec<Q>,
    pieces: Vec<Affine>,
}

/// Sign of `g(x) - x` on an orbital.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Down = -1,
    Fixed = 0,
    Up = 1,
}

/// A closed interval of ℚ; `None` endpoints are infinite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    pub lo: Option<Q>,
    pub hi: Option<Q>,
}

/// Open interval on which `g` moves every point in the same direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbital {
    pub lo: Option<Q>,
    pub hi: Option<Q>,
    pub sign: Sign,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitalReport {
    /// Maximal closed intervals (possibly single points) of fixed points.
    pub fixed: Vec<Span>,
    /// Components of the complement of the fixed set, in increasing order.
    pub orbitals: Vec<Orbital>,
}

impl PlOrderAut {
    pub fn new(breaks: Vec<Q>, pieces: Vec<Affine>) -> Result<Self> {
        if pieces.len() != breaks.len() + 1 {
            return Err(Error::Invalid("need one more piece than breakpoints".into()));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("breakpoints must increase".into()));
        }
        if let Some(p) = pieces.iter().find(|p| !p.slope.is_positive()) {
            return Err(Error::Invalid(format!("slope {} is not positive", qfmt(&p.slope))));
        }
        for (i, b) in breaks.iter().enumerate() {
            if pieces[i].apply(b) != pieces[i + 1].apply(b) {
                return Err(Error::Invalid(format!("discontinuous at {}", qfmt(b))));
            }
        }
        Ok(Self::canonical(breaks, pieces))
    }

    fn canonical(breaks: Vec<Q>, pieces: Vec<Affine>) -> Self {
        let mut out_b = Vec::new();
        let mut out_p = vec![pieces[0].clone()];
        for (b, p) in breaks.into_iter().zip(pieces.into_iter().skip(1)) {
            if *out_p.last().expect("nonempty") != p {
                out_b.push(b);
                out_p.push(p);
            }
        }
        Self { breaks: out_b, pieces: out_p }
    }

    pub fn affine(slope: Q, offset: Q) -> Result<Self> {
        Self::new(vec![], vec![Affine { slope, offset }])
    }

    /// Interpolates the knots `(x_i, y_i)` (both strictly increasing) and
    /// extends with the given end slopes.
    pub fn from_knots(knots: &[(Q, Q)], left_slope: Q, right_slope: Q) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Invalid("need at least one knot".into()));
        }
        if knots.windows(2).any(|w| w[0].0 >= w[1].0 || w[0].1 >= w[1].1) {
            return Err(Error::Invalid("knots must increase in both coordinates".into()));
        }
        let (x0, y0) = &knots[0];
        let mut pieces = vec![Affine { offset: y0 - &left_slope * x0, slope: left_slope }];
        for w in knots.windows(2) {
            let slope = (&w[1].1 - &w[0].1) / (&w[1].0 - &w[0].0);
            pieces.push(Affine { offset: &w[0].1 - &slope * &w[0].0, slope });
        }
        let (xn, yn) = knots.last().expect("nonempty");
        pieces.push(Affine { offset: yn - &right_slope * xn, slope: right_slope });
        Self::new(knots.iter().map(|k| k.0.clone()).collect(), pieces)
    }

    /// Random automorphism with up to `max_knots` knots at small rationals.
    pub fn random<R: Rng + ?Sized>(max_knots: usize, rng: &mut R) -> Self {
        let k = rng.gen_range(1..=max_knots.max(1));
        let mut xs: Vec<i64> = Vec::new();
        let mut ys: Vec<i64> = Vec::new();
        while xs.len() < k {
            let x = rng.gen_range(-40..=40);
            let y = rng.gen_range(-40..=40);
            if !xs.contains(&x) && !ys.contains(&y) {
                xs.push(x);
                ys.push(y);
            }
        }
        xs.sort_unstable();
        ys.sort_unstable();
        let knots: Vec<(Q, Q)> = xs.iter().zip(&ys).map(|(&x, &y)| (ratio(x, 4), ratio(y, 4))).collect();
        let slope = |rng: &mut R| ratio(rng.gen_range(1..=4), rng.gen_range(1..=4));
        let (l, r) = (slope(rng), slope(rng));
        Self::from_knots(&knots, l, r).expect("knots increase")
    }

    pub fn breaks(&self) -> &[Q] {
        &self.breaks
    }

    pub fn pieces(&self) -> &[Affine] {
        &self.pieces
    }

    fn piece_at(&self, x: &Q) -> &Affine {
        let i = self.breaks.partition_point(|b| b <= x);
        &self.pieces[i]
    }

    pub fn apply(&self, x: &Q) -> Q {
        self.piece_at(x).apply(x)
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &Self) -> Self {
        let inv = rhs.inverse();
        let mut breaks: Vec<Q> = rhs.breaks.clone();
        breaks.extend(self.breaks.iter().map(|b| inv.apply(b)));
        breaks.sort();
        breaks.dedup();
        let pieces = segments(&breaks)
            .iter()
            .map(|(lo, hi)| {
                let x = sample(lo.as_ref(), hi.as_ref());
                let inner = rhs.piece_at(&x);
                inner.then(self.piece_at(&inner.apply(&x)))
            })
            .collect();
        Self::canonical(breaks, pieces)
    }

    pub fn inverse(&self) -> Self {
        let breaks = self.breaks.iter().zip(&self.pieces).map(|(b, p)| p.apply(b)).collect();
        Self::canonical(breaks, self.pieces.iter().map(Affine::inverse).collect())
    }

    /// Fixed set and signed orbitals, computed piece by piece.
    pub fn orbitals(&self) -> OrbitalReport {
        let mut fixed: Vec<Span> = Vec::new();
        for ((lo, hi), p) in segments(&self.breaks).into_iter().zip(&self.pieces) {
            let part = if p.slope.is_one() {
                p.offset.is_zero().then(|| Span { lo: lo.clone(), hi: hi.clone() })
            } else {
                let x = &p.offset / (Q::one() - &p.slope);
                let inside = lo.as_ref().is_none_or(|l| *l <= x) && hi.as_ref().is_none_or(|h| x <= *h);
                inside.then(|| Span { lo: Some(x.clone()), hi: Some(x) })
            };
            if let Some(part) = part {
                match fixed.last_mut() {
                    Some(last) if last.hi.is_none() => {}
                    Some(last) if part.lo.is_some() && part.lo <= last.hi => {
                        if part.hi.is_none() || part.hi > last.hi {
                            last.hi = part.hi;
                        }
                    }
                    _ => fixed.push(part),
                }
            }
        }
        let mut orbitals = Vec::new();
        let mut lo: Option<Q> = None;
        let mut open_below = true;
        for f in &fixed {
            if open_below && f.lo.is_some() {
                orbitals.push(self.orbital(lo.clone(), f.lo.clone()));
            }
            lo = f.hi.clone();
            open_below = f.hi.is_some();
        }
        if open_below {
            orbitals.push(self.orbital(lo, None));
        }
        OrbitalReport { fixed, orbitals }
    }

    fn orbital(&self, lo: Option<Q>, hi: Option<Q>) -> Orbital {
        let x = sample(lo.as_ref(), hi.as_ref());
        let gx = self.apply(&x);
        let sign = match gx.cmp(&x) {
            std::cmp::Ordering::Greater => Sign::Up,
            std::cmp::Ordering::Less => Sign::Down,
            std::cmp::Ordering::Equal => Sign::Fixed,
        };
        Orbital { lo, hi, sign }
    }
}

fn segments(breaks: &[Q]) -> Vec<(Option<Q>, Option<Q>)> {
    let mut out = Vec::with_capacity(breaks.len() + 1);
    let mut lo = None;
    for b in breaks {
        out.push((lo, Some(b.clone())));
        lo = Some(b.clone());
    }
    out.push((lo, None));
    out
}

fn sample(lo: Option<&Q>, hi: Option<&Q>) -> Q {
    match (lo, hi) {
        (Some(l), Some(h)) => (l + h) / int(2),
        (Some(l), None) => l + int(1),
        (None, Some(h)) => h - int(1),
        (None, None) => Q::zero(),
    }
}

impl Group for PlOrderAut {
    fn identity() -> Self {
        Self { breaks: vec![], pieces: vec![Affine { slope: Q::one(), offset: Q::zero() }] }
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.compose(rhs)
    }

    fn inv(&self) -> Self {
        self.inverse()
    }
}

impl fmt::Display for PlOrderAut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.pieces.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "piece {} {}", qfmt(&p.slope), qfmt(&p.offset))?;
            if let Some(b) = self.breaks.get(i) {
                write!(f, " | x<{}", qfmt(b))?;
            }
        }
        Ok(())
    }
}

impl FromStr for PlOrderAut {
    type Err = Error;

    /// `piece a b | x<c; piece a b | x<d; piece a b`.
    fn from_str(s: &str) -> Result<Self> {
        let mut breaks = Vec::new();
        let mut pieces = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (body, bound) = match part.split_once('|') {
                Some((b, c)) => (b.trim(), Some(c.trim())),
                None => (part, None),
            };
            let toks: Vec<&str> = body.split_whitespace().collect();
            let [kw, a, b] = toks[..] else {
                return Err(Error::Parse(format!("bad piece {part:?}")));
            };
            if kw != "piece" {
                return Err(Error::Parse(format!("expected 'piece' in {part:?}")));
            }
            pieces.push(Affine { slope: qparse(a)?, offset: qparse(b)? });
            if let Some(c) = bound {
                let c = c.strip_prefix("x<").ok_or_else(|| Error::Parse(format!("expected 'x<c' in {part:?}")))?;
                breaks.push(qparse(c.trim())?);
            }
        }
        if pieces.is_empty() {
            return Err(Error::Parse("no pieces".into()));
        }
        Self::new(breaks, pieces)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pl(s: &str) -> PlOrderAut {
        s.parse().unwrap()
    }

    #[test]
    fn identity_has_no_orbitals() {
        let r = PlOrderAut::identity().orbitals();
        assert!(r.orbitals.is_empty());
        assert_eq!(r.fixed, vec![Span { lo: None, hi: None }]);
    }

    #[test]
    fn translation_moves_everything_up() {
        let r = pl("piece 1 1").orbitals();
        assert!(r.fixed.is_empty());
        assert_eq!(r.orbitals, vec![Orbital { lo: None, hi: None, sign: Sign::Up }]);
    }

    #[test]
    fn doubling_has_two_orbitals() {
        let r = pl("piece 2 0").orbitals();
        let zero = Some(Q::zero());
        assert_eq!(r.fixed, vec![Span { lo: zero.clone(), hi: zero.clone() }]);
        assert_eq!(
            r.orbitals,
            vec![
                Orbital { lo: None, hi: zero.clone(), sign: Sign::Down },
                Orbital { lo: zero, hi: None, sign: Sign::Up },
            ]
        );
    }

    #[test]
    fn fixed_interval_between_orbitals() {
        // 2x below 0, identity on [0,1], x/2 + 1/2 above 1
        let g = pl("piece 2 0 | x<0; piece 1 0 | x<1; piece 1/2 1/2");
        let r = g.orbitals();
        assert_eq!(r.fixed, vec![Span { lo: Some(int(0)), hi: Some(int(1)) }]);
        assert_eq!(r.orbitals.len(), 2);
        assert_eq!(r.orbitals[0].sign, Sign::Down);
        assert_eq!(r.orbitals[1].sign, Sign::Down);
    }

    #[test]
    fn group_laws_and_text() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = PlOrderAut::random(4, &mut rng);
            let b = PlOrderAut::random(4, &mut rng);
            assert!(a.compose(&a.inverse()).is_identity());
            let x = ratio(rng.gen_range(-100..100), 7);
            assert_eq!(a.compose(&b).apply(&x), a.apply(&b.apply(&x)));
            assert_eq!(a.to_string().parse::<PlOrderAut>().unwrap(), a);
        }
        assert!("piece 1 0 | x<0; piece 2 1".parse::<PlOrderAut>().is_err());
        assert!("piece -1 0".parse::<PlOrderAut>().is_err());
    }
}
