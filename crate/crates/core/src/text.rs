//! Text formats.
//!
//! ```text
//! set 2 0 3
//! mpt 2 1 2 3 0
//! step 1 [(0 1), ()]
//! tilde { step 1 [(0 1), ()] ; mpt 1 1 0 }
//! ```
//!
//! Neighbourhoods and synthesis tasks are line blocks closed by `end`:
//!
//! ```text
//! nbhd product
//! center tilde { step 0 [()] ; mpt 0 0 }
//! value 0 1/8
//! set 1/8 set 1 0
//! end
//!
//! nbhd pointwise
//! center tilde { step 0 [()] ; mpt 0 0 }
//! test 1/4 step 1 [0, 1]
//! end
//!
//! task synthesize
//! s mpt 2 1 2 3 0
//! target step 0 [(0 1)]
//! window 2
//! height 4
//! eps 1/2
//! end
//! ```

use std::fmt::{self, Display, Write as _};
use std::str::FromStr;

use crate::dyadic::{DyadicMpt, DyadicSet};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::groups::{IsometrySpace, WindowPerm};
use crate::l0::StepFn;
use crate::rational::{fmt as qfmt, parse as qparse, Q};
use crate::rokhlin::{SynthesisResult, SynthesisTask};
use crate::tilde::{PointwiseSpec, ProductSpec, TildeElement};

fn parse_header<'a>(s: &'a str, keyword: &str) -> Result<(u32, &'a str)> {
    let rest = s.trim().strip_prefix(keyword).ok_or_else(|| Error::Parse(format!("expected {keyword:?} in {s:?}")))?;
    let rest = rest.trim_start();
    let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
    let level = rest[..end].parse().map_err(|_| Error::Parse(format!("missing level in {s:?}")))?;
    Ok((level, rest[end..].trim()))
}

fn parse_indices(s: &str) -> Result<Vec<usize>> {
    s.split_whitespace().map(|t| t.parse().map_err(|_| Error::Parse(format!("not an index: {t:?}")))).collect()
}

impl FromStr for DyadicSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (level, rest) = parse_header(s, "set")?;
        DyadicSet::new(level, parse_indices(rest)?)
    }
}

impl FromStr for DyadicMpt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (level, rest) = parse_header(s, "mpt")?;
        let perm = parse_indices(rest)?.into_iter().map(|v| v as u32).collect();
        DyadicMpt::new(level, perm)
    }
}

/// Splits on commas outside parentheses and braces.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

impl<V> FromStr for StepFn<V>
where
    V: Clone + FromStr,
    V::Err: Display,
{
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (level, rest) = parse_header(s, "step")?;
        let body = rest
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("step values must be bracketed in {s:?}")))?;
        let values = if body.trim().is_empty() {
            Vec::new()
        } else {
            split_top_level(body)
                .into_iter()
                .map(|t| t.trim().parse::<V>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                .collect::<Result<Vec<V>>>()?
        };
        StepFn::new(level, values)
    }
}

impl<G> FromStr for TildeElement<G>
where
    G: Group + FromStr,
    G::Err: Display,
{
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected `tilde {{ step … ; mpt … }}` in {s:?}"));
        let body = s
            .trim()
            .strip_prefix("tilde")
            .map(str::trim)
            .and_then(|r| r.strip_prefix('{'))
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(bad)?;
        let split = body.rfind(';').ok_or_else(bad)?;
        Ok(TildeElement::new(body[..split].parse()?, body[split + 1..].parse()?))
    }
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn lines(s: &str) -> impl Iterator<Item = (usize, &str)> {
    s.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn at_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Parse(format!("line {line}: {e}")))
}

/// Lines of the block opened by `header`, up to its `end`.
fn block<'a>(s: &'a str, header: &str) -> Result<Vec<(usize, &'a str, &'a str)>> {
    let mut it = lines(s);
    match it.next() {
        Some((_, h)) if h == header => {}
        Some((n, h)) => return Err(Error::Parse(format!("line {n}: expected {header:?}, found {h:?}"))),
        None => return Err(Error::Parse(format!("empty input, expected {header:?}"))),
    }
    let mut out = Vec::new();
    for (n, l) in it {
        if l == "end" {
            return Ok(out);
        }
        let (key, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        out.push((n, key, rest.trim()));
    }
    Err(Error::Parse(format!("block {header:?} is not closed by `end`")))
}

fn unknown(line: usize, key: &str) -> Error {
    Error::Parse(format!("line {line}: unknown key {key:?}"))
}

fn missing(what: &str) -> Error {
    Error::Parse(format!("missing {what}"))
}

pub fn format_product_spec<S>(spec: &ProductSpec<S>) -> String
where
    S: IsometrySpace,
    S::Point: Display,
    S::Iso: Display,
{
    let mut out = format!("nbhd product\ncenter {}\n", spec.center);
    for (a, r) in &spec.values {
        writeln!(out, "value {a} {}", qfmt(r)).expect("string write");
    }
    for (set, r) in &spec.sets {
        writeln!(out, "set {} {set}", qfmt(r)).expect("string write");
    }
    out.push_str("end\n");
    out
}

pub fn parse_product_spec<S>(s: &str) -> Result<ProductSpec<S>>
where
    S: IsometrySpace,
    S::Point: FromStr,
    <S::Point as FromStr>::Err: Display,
    S::Iso: FromStr,
    <S::Iso as FromStr>::Err: Display,
{
    let mut center = None;
    let mut values = Vec::new();
    let mut sets = Vec::new();
    for (n, key, rest) in block(s, "nbhd product")? {
        match key {
            "center" => center = Some(at_line(n, rest.parse())?),
            "value" => {
                let (a, r) = rest.split_once(char::is_whitespace).ok_or_else(|| missing("radius"))?;
                let a = a.parse::<S::Point>().map_err(|e| Error::Parse(format!("line {n}: {e}")))?;
                values.push((a, at_line(n, qparse(r))?));
            }
            "set" => {
                let (r, set) = rest.split_once(char::is_whitespace).ok_or_else(|| missing("set"))?;
                sets.push((at_line(n, set.parse())?, at_line(n, qparse(r))?));
            }
            other => return Err(unknown(n, other)),
        }
    }
    Ok(ProductSpec { center: center.ok_or_else(|| missing("center"))?, values, sets })
}

pub fn format_pointwise_spec<S>(spec: &PointwiseSpec<S>) -> String
where
    S: IsometrySpace,
    S::Point: Display,
    S::Iso: Display,
{
    let mut out = format!("nbhd pointwise\ncenter {}\n", spec.center);
    for (alpha, r) in &spec.tests {
        writeln!(out, "test {} {alpha}", qfmt(r)).expect("string write");
    }
    out.push_str("end\n");
    out
}

pub fn parse_pointwise_spec<S>(s: &str) -> Result<PointwiseSpec<S>>
where
    S: IsometrySpace,
    S::Point: FromStr,
    <S::Point as FromStr>::Err: Display,
    S::Iso: FromStr,
    <S::Iso as FromStr>::Err: Display,
{
    let mut center = None;
    let mut tests = Vec::new();
    for (n, key, rest) in block(s, "nbhd pointwise")? {
        match key {
            "center" => center = Some(at_line(n, rest.parse())?),
            "test" => {
                let (r, alpha) = rest.split_once(char::is_whitespace).ok_or_else(|| missing("test function"))?;
                tests.push((at_line(n, alpha.parse())?, at_line(n, qparse(r))?));
            }
            other => return Err(unknown(n, other)),
        }
    }
    Ok(PointwiseSpec { center: center.ok_or_else(|| missing("center"))?, tests })
}

pub fn format_task(task: &SynthesisTask) -> String {
    let mut out = format!("task synthesize\ns {}\ntarget {}\n", task.s, task.target);
    writeln!(out, "window {}\nheight {}\neps {}", task.window, task.height, qfmt(&task.eps)).expect("string write");
    writeln!(out, "max_copies {}", task.max_copies).expect("string write");
    if let Some(sigma) = &task.sigma {
        writeln!(out, "sigma {sigma}").expect("string write");
    }
    out.push_str("end\n");
    out
}

pub fn parse_task(s: &str) -> Result<SynthesisTask> {
    let mut task_s = None;
    let mut target = None;
    let (mut window, mut height, mut eps) = (None, None, None);
    let mut max_copies = 8;
    let mut sigma = None;
    let int = |n: usize, v: &str| -> Result<usize> {
        v.parse().map_err(|_| Error::Parse(format!("line {n}: not a count: {v:?}")))
    };
    for (n, key, rest) in block(s, "task synthesize")? {
        match key {
            "s" => task_s = Some(at_line(n, rest.parse())?),
            "target" => target = Some(at_line(n, rest.parse())?),
            "window" => window = Some(int(n, rest)?),
            "height" => height = Some(int(n, rest)?),
            "eps" => eps = Some(at_line(n, qparse(rest))?),
            "max_copies" => max_copies = int(n, rest)?,
            "sigma" => sigma = Some(at_line(n, rest.parse::<WindowPerm>())?),
            other => return Err(unknown(n, other)),
        }
    }
    Ok(SynthesisTask {
        sigma,
        s: task_s.ok_or_else(|| missing("s"))?,
        target: target.ok_or_else(|| missing("target"))?,
        window: window.ok_or_else(|| missing("window"))?,
        height: height.ok_or_else(|| missing("height"))?,
        eps: eps.ok_or_else(|| missing("eps"))?,
        max_copies,
    })
}

/// Summary block of a synthesis run; certificates are emitted separately.
pub struct ResultBlock<'a>(pub &'a SynthesisResult);

impl Display for ResultBlock<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        writeln!(f, "result synthesize")?;
        writeln!(f, "level {}", r.exact.level)?;
        writeln!(f, "height {}", r.exact.height)?;
        writeln!(f, "columns {}", r.exact.columns.len())?;
        writeln!(f, "sigma_window {}", r.sigma.window())?;
        if let Some(b) = r.budget {
            writeln!(f, "budget {} {}", b.max_len, b.copies)?;
        }
        writeln!(f, "distance {}", qfmt(&r.distance))?;
        writeln!(f, "agreement {}", qfmt(&r.agreement))?;
        writeln!(f, "equations {}/{}", r.equations.iter().filter(|c| c.ok).count(), r.equations.len())?;
        writeln!(f, "telescoping {}/{}", r.telescoping.iter().filter(|c| c.ok).count(), r.telescoping.len())?;
        writeln!(f, "end")
    }
}

/// Rational as it appears in every text format.
pub fn rational(q: &Q) -> String {
    qfmt(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{Naturals, PlOrderAut};
    use crate::rational::ratio;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn element_round_trips() {
        let set: DyadicSet = "set 2 0 3".parse().unwrap();
        assert_eq!(set.to_string().parse::<DyadicSet>().unwrap(), set);
        let t: DyadicMpt = "mpt 2 1 2 3 0".parse().unwrap();
        assert_eq!(t.to_string().parse::<DyadicMpt>().unwrap(), t);
        let x: TildeElement<WindowPerm> = "tilde { step 1 [(0 1), ()] ; mpt 1 1 0 }".parse().unwrap();
        assert_eq!(x.to_string().parse::<TildeElement<WindowPerm>>().unwrap(), x);
        assert!("mpt 1 0 0".parse::<DyadicMpt>().is_err());
        assert!("step 1 [()]".parse::<StepFn<WindowPerm>>().is_err());
    }

    #[test]
    fn pl_values_in_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = StepFn::random(1, &mut rng, |r| PlOrderAut::random(3, r));
        let text = f.to_string();
        assert_eq!(text.parse::<StepFn<PlOrderAut>>().unwrap(), f);
        let x = TildeElement::new(f, DyadicMpt::shift(2, 1));
        assert_eq!(x.to_string().parse::<TildeElement<PlOrderAut>>().unwrap(), x);
    }

    #[test]
    fn neighbourhood_blocks() {
        let spec = ProductSpec::<Naturals> {
            center: "tilde { step 0 [(0 1)] ; mpt 1 1 0 }".parse().unwrap(),
            values: vec![(0, ratio(1, 8)), (3, ratio(1, 16))],
            sets: vec![("set 1 0".parse().unwrap(), ratio(1, 8))],
        };
        let text = format_product_spec(&spec);
        let back: ProductSpec<Naturals> = parse_product_spec(&text).unwrap();
        assert_eq!(format_product_spec(&back), text);
        let pw = PointwiseSpec::<Naturals> {
            center: spec.center.clone(),
            tests: vec![("step 1 [0, 1]".parse().unwrap(), ratio(1, 4))],
        };
        let text = format_pointwise_spec(&pw);
        let back: PointwiseSpec<Naturals> = parse_pointwise_spec(&text).unwrap();
        assert_eq!(format_pointwise_spec(&back), text);
    }

    #[test]
    fn block_errors_name_the_line() {
        let err = parse_task("task synthesize\ns mpt 1 1 0\n\nwindow x\nend\n").unwrap_err();
        assert_eq!(err, Error::Parse("line 4: not a count: \"x\"".into()));
        assert!(parse_task("task synthesize\nwindow 2\n").is_err());
        let err = parse_product_spec::<Naturals>("nbhd product\nbogus 1\nend").unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }

    #[test]
    fn task_round_trip() {
        let text =
            "task synthesize\ns mpt 2 1 2 3 0\ntarget step 0 [(0 1)]\nwindow 2\nheight 4\neps 1/2\nmax_copies 8\nend\n";
        let task = parse_task(text).unwrap();
        assert_eq!(format_task(&task), text);
    }

    proptest! {
        #[test]
        fn random_mpts_round_trip(seed in any::<u64>(), level in 0u32..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = DyadicMpt::random(level, &mut rng);
            prop_assert_eq!(t.to_string().parse::<DyadicMpt>().unwrap(), t);
        }
    }
}
