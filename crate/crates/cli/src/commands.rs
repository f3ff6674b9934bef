//! The experiment subcommands.

use std::path::Path;

use clap::Subcommand;
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use randiso::dyadic::{periodic_approximation, DyadicMpt, DyadicSet};
use randiso::groups::{
    power_cycle_type, power_surrogate, FiniteSpace, IsometrySpace, MptMetric, Naturals, PermMetric, PlOrderAut,
    PowerInvariance, WindowPerm,
};
use randiso::l0::{dhat, dhat_u, StepFn};
use randiso::rational::{fmt as qfmt, parse as qparse, ratio, Q};
use randiso::rokhlin::{
    approx_conjugate_constant, conjugate_into_neighborhood, diagonal_experiment, interleave, plan_density,
    synthesize_conjugator, synthesize_conjugator_metric, CycleTypeOracle, SynthesisTask,
};
use randiso::text::parse_product_spec;
use randiso::tilde::{
    lu_bounds, lu_estimate, lu_exact_discrete, pointwise_metric, truncation_bound, ProductSpec, TildeElement,
};
use randiso::Group;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::report::{CertificateRow, Report};
use crate::suites;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Distances between two randomization elements.
    Metrics,
    /// Rokhlin tower and periodic approximation of an interval permutation.
    Tower,
    /// Conjugator synthesis with certificates.
    Synthesize,
    /// Conjugation into neighbourhoods, constant conjugacy and diagonal runs.
    Density,
    /// The acceptance suites.
    Verify,
    /// Cycle types and orbitals under powers.
    Power,
}

pub fn run(command: Command, config: &Config, base_dir: &Path) -> Result<Report> {
    let mut report = Report::new(&format!("{command:?}\n{}", config.canonical()));
    match command {
        Command::Metrics => metrics(config, &mut report)?,
        Command::Tower => tower(config, &mut report)?,
        Command::Synthesize => synthesize(config, &mut report)?,
        Command::Density => density(config, base_dir, &mut report)?,
        Command::Verify => verify(config, &mut report)?,
        Command::Power => power(config, &mut report)?,
    }
    Ok(report)
}

fn value_error(key: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Value { key: key.into(), message: e.to_string() }
}

fn shuffled<R: Rng>(r: &mut R, k: usize) -> WindowPerm {
    let mut map: Vec<u32> = (0..k as u32).collect();
    map.shuffle(r);
    WindowPerm::new(map).expect("shuffled range")
}

/// `key` from the config, or a random full cycle at `level`.
fn mpt_or_cycle(
    config: &Config,
    key: &str,
    level_key: &str,
    default_level: u32,
    r: &mut ChaCha8Rng,
) -> Result<DyadicMpt> {
    match config.get(key)? {
        Some(t) => Ok(t),
        None => Ok(DyadicMpt::random_full_cycle(config.get_or(level_key, default_level)?, r)),
    }
}

fn metrics(config: &Config, report: &mut Report) -> Result<()> {
    config.expect_keys(&["a", "b", "space", "points", "budget", "seed", "level"])?;
    let seed = config.seed()?;
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let level: u32 = config.get_or("level", 3)?;
    let element = |key: &str, r: &mut ChaCha8Rng| -> Result<TildeElement<WindowPerm>> {
        match config.get(key)? {
            Some(x) => Ok(x),
            None => Ok(TildeElement::new(StepFn::random(level, r, |r| shuffled(r, 4)), DyadicMpt::random(level, r))),
        }
    };
    let a = element("a", &mut r)?;
    let b = element("b", &mut r)?;
    let budget: usize = config.get_or("budget", 8)?;
    match config.get_or::<String>("space", "naturals".into())?.as_str() {
        "naturals" => metric_rows(&Naturals::default(), &a, &b, budget, seed, report),
        "line" => {
            let points = config.get_or::<String>("points", "0, 1/2, 1".into())?;
            let points = points.split(',').map(|p| qparse(p.trim())).collect::<randiso::Result<Vec<Q>>>()?;
            let space = FiniteSpace::on_line(&points)?;
            metric_rows(&space, &a, &b, budget, seed, report)
        }
        other => Err(value_error("space", format!("unknown space {other:?}"))),
    }
}

fn metric_rows<S: IsometrySpace<Iso = WindowPerm>>(
    space: &S,
    a: &TildeElement<WindowPerm>,
    b: &TildeElement<WindowPerm>,
    budget: usize,
    seed: u64,
    report: &mut Report,
) -> Result<()> {
    report.experiment("metrics");
    report.value("fiber_dhat", &dhat(&PermMetric, &a.fiber, &b.fiber));
    report.value("fiber_dhat_u", &dhat_u(&PermMetric, &a.fiber, &b.fiber));
    report.value("base_delta_u", &a.base.delta_u(&b.base));
    report.value("base_delta_w", &a.base.delta_w(&b.base));
    report.value("pointwise", &pointwise_metric(space, a, b, budget));
    report.value("pointwise_tail_bound", &truncation_bound(budget));
    let bounds = lu_bounds(space, a, b)?;
    let est = lu_estimate(space, a, b, budget, seed);
    report.value("lu_lower", &bounds.lower);
    report.value("lu_estimate", &est);
    report.value("lu_upper", &bounds.upper);
    report.value("lu_max_lower", &bounds.max_lower);
    report.value("product_max", &bounds.product_max);
    report.value("product_sum", &bounds.product_sum);
    report.check(
        "sandwich",
        format!("{} <= {} <= {}", qfmt(&bounds.lower), qfmt(&est), qfmt(&bounds.upper)),
        bounds.lower <= est && est <= bounds.upper,
    );
    if space.is_discrete() {
        let exact = lu_exact_discrete(space, a, b)?;
        report.value("lu_exact", &exact);
        report.check("estimate_below_exact", qfmt(&est), est <= exact);
    }
    Ok(())
}

fn tower(config: &Config, report: &mut Report) -> Result<()> {
    config.expect_keys(&["t", "level", "height", "eps", "seed"])?;
    let t = match config.get::<DyadicMpt>("t")? {
        Some(t) => t,
        None => {
            DyadicMpt::random_full_cycle(config.get_or("level", 10)?, &mut ChaCha8Rng::seed_from_u64(config.seed()?))
        }
    };
    let height: usize = config.require("height")?;
    let eps = config.rational_or("eps", ratio(1, height as i64))?;
    report.experiment("tower");
    let pa = periodic_approximation(&t, height, &eps)?;
    report.row("level", pa.exact.level.to_string(), true);
    report.row("height", height.to_string(), true);
    report.row("columns", pa.exact.columns.len().to_string(), true);
    report.value("base_measure", &pa.tower.base.measure());
    report.value("leftover_measure", &pa.tower.leftover.measure());
    let bound = &eps + ratio(1, height as i64);
    report.check("distance", qfmt(&pa.distance), pa.distance <= bound);
    let cycles_ok = pa.s0.cycles().iter().all(|c| c.len() == height);
    report.check("periodic_cycles", if cycles_ok { "all of length N" } else { "wrong length" }, cycles_ok);
    Ok(())
}

fn synthesize(config: &Config, report: &mut Report) -> Result<()> {
    match config.get_or::<String>("group", "window".into())?.as_str() {
        "window" => synthesize_window(config, report),
        "mpt" => synthesize_mpt(config, report),
        other => Err(value_error("group", format!("unknown base group {other:?}"))),
    }
}

fn synthesize_window(config: &Config, report: &mut Report) -> Result<()> {
    config.expect_keys(&[
        "group",
        "s",
        "level",
        "target",
        "target_level",
        "window",
        "height",
        "eps",
        "max_copies",
        "sigma",
        "seed",
    ])?;
    let mut r = ChaCha8Rng::seed_from_u64(config.get_or("seed", 0)?);
    if !(config.has("s") && config.has("target")) {
        config.seed()?;
    }
    let window: usize = config.require("window")?;
    let height: usize = config.require("height")?;
    let s = mpt_or_cycle(config, "s", "level", 10, &mut r)?;
    let target = match config.get::<StepFn<WindowPerm>>("target")? {
        Some(t) => t,
        None => StepFn::random(config.get_or("target_level", 2)?, &mut r, |r| shuffled(r, window)),
    };
    let task = SynthesisTask {
        sigma: config.get("sigma")?,
        s,
        target,
        window,
        height,
        eps: config.rational_or("eps", ratio(2, height as i64))?,
        max_copies: config.get_or("max_copies", 8)?,
    };
    report.experiment("synthesize");
    let res = synthesize_conjugator(&task)?;
    report.row("level", res.exact.level.to_string(), true);
    report.row("columns", res.exact.columns.len().to_string(), true);
    report.row("sigma_window", res.sigma.window().to_string(), true);
    report.value("distance", &res.distance);
    report.check("agreement", qfmt(&res.agreement), res.agreement >= Q::one() - &task.eps);
    let ok = |n: usize, total: usize| format!("{n}/{total}");
    let eq_ok = res.equations.iter().filter(|c| c.ok).count();
    report.check("commutation", ok(eq_ok, res.equations.len()), eq_ok == res.equations.len());
    let tel_ok = res.telescoping.iter().filter(|c| c.ok).count();
    report.check("telescoping", ok(tel_ok, res.telescoping.len()), tel_ok == res.telescoping.len());
    let id = report.id().to_string();
    for c in &res.equations {
        report.certificate(CertificateRow {
            id: id.clone(),
            kind: "commutation",
            column: c.column,
            level: Some(c.level),
            n: Some(c.n),
            lhs: c.lhs.to_string(),
            rhs: c.rhs.to_string(),
            ok: c.ok,
        });
    }
    for c in &res.telescoping {
        report.certificate(CertificateRow {
            id: id.clone(),
            kind: "telescoping",
            column: c.column,
            level: None,
            n: Some(c.n),
            lhs: c.lhs.to_string(),
            rhs: c.rhs.to_string(),
            ok: c.ok,
        });
    }
    Ok(())
}

fn synthesize_mpt(config: &Config, report: &mut Report) -> Result<()> {
    config.expect_keys(&[
        "group",
        "s",
        "level",
        "sigma_level",
        "target_level",
        "value_level",
        "height",
        "eps",
        "eps_g",
        "seed",
    ])?;
    let mut r = ChaCha8Rng::seed_from_u64(config.seed()?);
    let sigma = DyadicMpt::random_full_cycle(config.get_or("sigma_level", 10)?, &mut r);
    let s = mpt_or_cycle(config, "s", "level", 6, &mut r)?;
    let value_level: u32 = config.get_or("value_level", 8)?;
    let h = StepFn::random(config.get_or("target_level", 2)?, &mut r, |r| DyadicMpt::random_full_cycle(value_level, r));
    let height: usize = config.require("height")?;
    let eps = config.rational_or("eps", ratio(1, 2))?;
    let eps_g = config.rational_or("eps_g", ratio(1, 8))?;
    report.experiment("synthesize_mpt");
    let res = synthesize_conjugator_metric(&MptMetric, &CycleTypeOracle, &sigma, &s, &h, height, &eps, &eps_g)?;
    report.value("distance", &res.distance);
    report.check("max_deviation", qfmt(&res.max_deviation), res.max_deviation <= eps_g);
    report.check("agreement", qfmt(&res.agreement), res.agreement >= Q::one() - &eps);
    let id = report.id().to_string();
    for d in &res.deviations {
        report.certificate(CertificateRow {
            id: id.clone(),
            kind: "deviation",
            column: d.column,
            level: Some(d.level),
            n: None,
            lhs: qfmt(&d.deviation),
            rhs: qfmt(&eps_g),
            ok: d.ok,
        });
    }
    Ok(())
}

/// A product neighbourhood around a random centre, as in the acceptance
/// suite.
fn random_spec(r: &mut ChaCha8Rng, level: u32, eps: &Q) -> ProductSpec<Naturals> {
    let fiber_level = r.gen_range(0..=2);
    let fiber = StepFn::random(fiber_level, r, |r| shuffled(r, 3));
    let center = TildeElement::new(fiber, DyadicMpt::random_full_cycle(level, r));
    let set_level = r.gen_range(1..=3);
    let set = DyadicSet::new(set_level, (0..1usize << set_level).filter(|_| r.gen_bool(0.5))).expect("in range");
    ProductSpec { center, values: vec![(0, eps.clone()), (1, eps.clone())], sets: vec![(set, eps.clone())] }
}

fn density(config: &Config, base_dir: &Path, report: &mut Report) -> Result<()> {
    config.expect_keys(&[
        "mode",
        "nbhd",
        "source",
        "level",
        "source_level",
        "eps",
        "h",
        "t",
        "s",
        "coordinates",
        "seed",
    ])?;
    let mut r = ChaCha8Rng::seed_from_u64(config.get_or("seed", 0)?);
    let eps = config.rational_or("eps", ratio(1, 8))?;
    let level: u32 = config.get_or("level", 8)?;
    let space = Naturals::default();
    match config.get_or::<String>("mode", "neighborhood".into())?.as_str() {
        "neighborhood" => {
            let spec = match config.get::<String>("nbhd")? {
                Some(path) => parse_product_spec::<Naturals>(&std::fs::read_to_string(base_dir.join(path))?)?,
                None => {
                    config.seed()?;
                    random_spec(&mut r, level, &eps)
                }
            };
            let source = match config.get::<TildeElement<WindowPerm>>("source")? {
                Some(x) => x,
                None => {
                    let plan = plan_density(&spec);
                    let sigma = power_surrogate(2 * plan.window + 1, plan.height, 2)?;
                    TildeElement::constant(sigma, mpt_or_cycle(config, "t", "source_level", 10, &mut r)?)
                }
            };
            report.experiment("neighborhood");
            let out = conjugate_into_neighborhood(&space, &source, &spec)?;
            report.row("window", out.plan.window.to_string(), true);
            report.row("height", out.plan.height.to_string(), true);
            report.value("aut_distance", &out.aut_distance);
            for (i, q) in out.residuals.values.iter().enumerate() {
                report.check(format!("value_residual_{i}"), qfmt(q), q > &Q::default());
            }
            for (i, q) in out.residuals.sets.iter().enumerate() {
                report.check(format!("set_residual_{i}"), qfmt(q), q > &Q::default());
            }
            report.check("member", spec.contains(&space, &out.image).to_string(), spec.contains(&space, &out.image));
        }
        "constant" => {
            if !(config.has("h") && config.has("t") && config.has("s")) {
                config.seed()?;
            }
            let h = match config.get::<WindowPerm>("h")? {
                Some(h) => h,
                None => shuffled(&mut r, 4),
            };
            let t = mpt_or_cycle(config, "t", "source_level", 10, &mut r)?;
            let s = mpt_or_cycle(config, "s", "level", level, &mut r)?;
            report.experiment("constant");
            let cc = approx_conjugate_constant(&space, &h, &t, &s, &eps)?;
            report.check("lu", qfmt(&cc.lu), cc.lu < eps);
            report.row("exact", cc.exact.to_string(), true);
        }
        "diagonal" => {
            config.seed()?;
            let n: usize = config.get_or("coordinates", 2)?;
            let t = mpt_or_cycle(config, "t", "source_level", 10, &mut r)?;
            let s = mpt_or_cycle(config, "s", "level", level, &mut r)?;
            let mut sources = Vec::with_capacity(n);
            let mut targets = Vec::with_capacity(n);
            for j in 0..n {
                let place = |p: &WindowPerm| {
                    let parts: Vec<WindowPerm> =
                        (0..n).map(|i| if i == j { p.clone() } else { WindowPerm::identity() }).collect();
                    interleave(&parts)
                };
                let fiber = StepFn::random(1, &mut r, |r| shuffled(r, 3)).map(place);
                let values = vec![(j as u32, eps.clone()), ((n + j) as u32, eps.clone())];
                targets.push(ProductSpec::<Naturals> {
                    center: TildeElement::new(fiber, s.clone()),
                    values,
                    sets: vec![(DyadicSet::new(1, [0]).expect("in range"), eps.clone())],
                });
                let plan = plan_density(&ProductSpec::<Naturals> {
                    center: TildeElement::identity(),
                    values: vec![(1, eps.clone())],
                    sets: vec![],
                });
                sources.push(TildeElement::constant(place(&power_surrogate(5, plan.height, 2)?), t.clone()));
            }
            report.experiment("diagonal");
            let rep = diagonal_experiment(&space, &sources, &targets)?;
            for (j, c) in rep.coordinates.iter().enumerate() {
                report.check(format!("coordinate_{j}"), c.member.to_string(), c.member);
            }
        }
        other => return Err(value_error("mode", format!("unknown mode {other:?}"))),
    }
    Ok(())
}

fn verify(config: &Config, report: &mut Report) -> Result<()> {
    config.expect_keys(&["only"])?;
    let only: Option<Vec<usize>> = match config.get::<String>("only")? {
        Some(list) => Some(
            list.split(',')
                .map(|s| s.trim().parse().map_err(|_| value_error("only", format!("not a criterion: {s:?}"))))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    for c in suites::criteria() {
        if only.as_ref().is_some_and(|o| !o.contains(&c.id)) {
            continue;
        }
        report.experiment(format!("criterion_{}", c.id));
        let out = c.run();
        report.check(out.name, out.detail, out.passed);
    }
    Ok(())
}

fn power(config: &Config, report: &mut Report) -> Result<()> {
    config.expect_keys(&["max_window", "max_power", "samples", "pl_samples", "mpt_level", "seed"])?;
    let mut r = ChaCha8Rng::seed_from_u64(config.seed()?);
    let max_window: usize = config.get_or("max_window", 64)?;
    let max_power: usize = config.get_or("max_power", 12)?;
    let samples: usize = config.get_or("samples", 4)?;

    report.experiment("cycle_type");
    let (mut checked, mut agree) = (0usize, 0usize);
    for w in 0..=max_window {
        for _ in 0..samples {
            let p = shuffled(&mut r, w);
            for n in 1..=max_power {
                checked += 1;
                agree += usize::from(power_cycle_type(&p, n) == p.pow(n as u32).with_window(w).census());
            }
        }
    }
    report.check("rule_matches_composition", format!("{agree}/{checked}"), agree == checked);

    report.experiment("mpt_power");
    let level: u32 = config.get_or("mpt_level", 8)?;
    let (mut consistent, mut total) = (0usize, 0usize);
    for _ in 0..samples {
        let t = DyadicMpt::random(level, &mut r);
        for n in 1..=max_power {
            total += 1;
            consistent += usize::from(t.power_report(n).consistent());
        }
    }
    report.check("min_cycle_prediction", format!("{consistent}/{total}"), consistent == total);

    report.experiment("pl_orbitals");
    let pl_samples: usize = config.get_or("pl_samples", 100)?;
    let (mut same, mut total) = (0usize, 0usize);
    for _ in 0..pl_samples {
        let g = PlOrderAut::random(6, &mut r);
        for n in 1..=5 {
            total += 1;
            same += usize::from(g.power_report(n).invariant());
        }
    }
    report.check("orbitals_and_signs_invariant", format!("{same}/{total}"), same == total);
    Ok(())
}
