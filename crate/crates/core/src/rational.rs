//! Exact rational helpers.
//!
//! Every measure and metric in the crate is a [`Q`]. Most of them are dyadic
//! (a power of two in the denominator), and the helpers here build those
//! without going through repeated gcd-normalising additions.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number.
pub type Q = BigRational;

pub fn zero() -> Q {
    Q::zero()
}

pub fn one() -> Q {
    Q::one()
}

/// `num / den` for small integers.
pub fn ratio(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// `count · 2^-level`.
pub fn dyadic(count: usize, level: u32) -> Q {
    Q::new(BigInt::from(count), BigInt::one() << level as usize)
}

/// `2^-k`.
pub fn pow2_inv(k: u32) -> Q {
    Q::new(BigInt::one(), BigInt::one() << k as usize)
}

/// Sum of `2^-(n+1)` over the given indices, computed as one integer numerator.
pub fn weighted_index_sum<I: IntoIterator<Item = usize>>(indices: I) -> Q {
    let idx: Vec<usize> = indices.into_iter().collect();
    let Some(&max) = idx.iter().max() else {
        return zero();
    };
    let top = max + 1;
    let mut num = BigUint::zero();
    for n in idx {
        num.set_bit((top - 1 - n) as u64, true);
    }
    Q::new(BigInt::from(num), BigInt::one() << top)
}

/// Accumulates `Σ_m 2^-(m+1) · x_m` for rationals `x_m` over a common
/// denominator, using Horner's rule on the weights.
#[derive(Debug, Clone, Default)]
pub struct GeometricSum {
    terms: Vec<Q>,
}

impl GeometricSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: Q) {
        self.terms.push(x);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total(&self) -> Q {
        let lcm = self.terms.iter().fold(BigInt::one(), |acc, t| acc.lcm(t.denom()));
        let mut num = BigInt::zero();
        for t in &self.terms {
            num <<= 1usize;
            num += t.numer() * (&lcm / t.denom());
        }
        Q::new(num, lcm << self.terms.len())
    }
}

/// Exact sum that delays normalisation until the end.
pub fn sum<'a, I: IntoIterator<Item = &'a Q>>(items: I) -> Q {
    let items: Vec<&Q> = items.into_iter().collect();
    let lcm = items.iter().fold(BigInt::one(), |acc, t| acc.lcm(t.denom()));
    let mut num = BigInt::zero();
    for t in items {
        num += t.numer() * (&lcm / t.denom());
    }
    Q::new(num, lcm)
}

pub fn min(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Renders as `p/q` (or `p` for integers).
pub fn fmt(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `p/q`, `p` or a finite decimal such as `0.125`.
pub fn parse(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Q::new(p, q));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let neg = whole.starts_with('-');
        let w: BigInt =
            if whole.is_empty() || whole == "-" { BigInt::zero() } else { whole.parse().map_err(|_| bad())? };
        let f: BigInt = frac.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Q::new(w.abs() * &den + f, den);
        return Ok(if neg { -mag } else { mag });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(Q::from_integer(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_sum_of_first_two_points() {
        assert_eq!(weighted_index_sum([0, 1]), ratio(3, 4));
        assert_eq!(weighted_index_sum([5, 6]), ratio(3, 128));
        assert_eq!(weighted_index_sum(Vec::new()), zero());
    }

    #[test]
    fn geometric_sum_matches_naive() {
        let xs = [ratio(1, 3), ratio(1, 2), zero(), ratio(7, 8), one()];
        let mut g = GeometricSum::new();
        let mut naive = zero();
        for (m, x) in xs.iter().enumerate() {
            g.push(x.clone());
            naive += x * pow2_inv(m as u32 + 1);
        }
        assert_eq!(g.total(), naive);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/4").unwrap(), ratio(3, 4));
        assert_eq!(parse("-2").unwrap(), int(-2));
        assert_eq!(parse("0.125").unwrap(), ratio(1, 8));
        assert_eq!(parse("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert_eq!(fmt(&ratio(6, 8)), "3/4");
        assert_eq!(fmt(&int(2)), "2");
    }
}
