//! Browser bindings: three operations returning JSON text.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randiso::dyadic::{periodic_approximation, DyadicMpt};
use randiso::groups::{Naturals, PermMetric, WindowPerm};
use randiso::l0::{dhat_u, StepFn};
use randiso::rational::{fmt as qfmt, parse as qparse, ratio};
use randiso::rokhlin::{synthesize_conjugator, SynthesisTask};
use randiso::tilde::{lu_bounds, lu_estimate, lu_exact_discrete, TildeElement};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Periodic approximation of a random full cycle.
pub fn tower_json(level: u32, height: usize, seed: u64) -> Result<String, String> {
    let t = DyadicMpt::random_full_cycle(level, &mut ChaCha8Rng::seed_from_u64(seed));
    let pa = periodic_approximation(&t, height, &ratio(1, height as i64)).map_err(|e| e.to_string())?;
    Ok(json!({
        "level": pa.exact.level,
        "height": height,
        "columns": pa.exact.columns,
        "leftover": qfmt(&pa.tower.leftover.measure()),
        "distance": qfmt(&pa.distance),
    })
    .to_string())
}

/// Distances between two elements written as `tilde { step … ; mpt … }`.
pub fn distances_json(a: &str, b: &str, budget: usize, seed: u64) -> Result<String, String> {
    let a: TildeElement<WindowPerm> = a.parse().map_err(|e: randiso::Error| format!("first element: {e}"))?;
    let b: TildeElement<WindowPerm> = b.parse().map_err(|e: randiso::Error| format!("second element: {e}"))?;
    let space = Naturals::default();
    let bounds = lu_bounds(&space, &a, &b).map_err(|e| e.to_string())?;
    Ok(json!({
        "fiber_dhat_u": qfmt(&dhat_u(&PermMetric, &a.fiber, &b.fiber)),
        "base_delta_u": qfmt(&a.base.delta_u(&b.base)),
        "lu_exact": qfmt(&lu_exact_discrete(&space, &a, &b).map_err(|e| e.to_string())?),
        "lu_estimate": qfmt(&lu_estimate(&space, &a, &b, budget, seed)),
        "lu_lower": qfmt(&bounds.lower),
        "lu_upper": qfmt(&bounds.upper),
    })
    .to_string())
}

/// Conjugator synthesis against a random full cycle at `level`.
pub fn synthesize_json(
    target: &str,
    window: usize,
    height: usize,
    level: u32,
    eps: &str,
    seed: u64,
) -> Result<String, String> {
    let target: StepFn<WindowPerm> = target.parse().map_err(|e: randiso::Error| e.to_string())?;
    let s = DyadicMpt::random_full_cycle(level, &mut ChaCha8Rng::seed_from_u64(seed));
    let task = SynthesisTask {
        sigma: None,
        s,
        target,
        window,
        height,
        eps: qparse(eps).map_err(|e| e.to_string())?,
        max_copies: 8,
    };
    let res = synthesize_conjugator(&task).map_err(|e| e.to_string())?;
    let values: Vec<String> = res.g.values().iter().map(ToString::to_string).collect();
    Ok(json!({
        "level": res.exact.level,
        "sigma": res.sigma.to_string(),
        "distance": qfmt(&res.distance),
        "agreement": qfmt(&res.agreement),
        "equations_ok": res.equations.iter().filter(|c| c.ok).count(),
        "equations": res.equations.len(),
        "telescoping_ok": res.telescoping.iter().all(|c| c.ok),
        "conjugator": values,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn tower(level: u32, height: usize, seed: u64) -> Result<String, JsError> {
    tower_json(level, height, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn distances(a: &str, b: &str, budget: usize, seed: u64) -> Result<String, JsError> {
    distances_json(a, b, budget, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn synthesize(
    target: &str,
    window: usize,
    height: usize,
    level: u32,
    eps: &str,
    seed: u64,
) -> Result<String, JsError> {
    synthesize_json(target, window, height, level, eps, seed).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    #[test]
    fn tower_columns_have_height() {
        let v: Value = serde_json::from_str(&tower_json(8, 8, 1).unwrap()).unwrap();
        assert!(v["columns"].as_array().unwrap().iter().all(|c| c.as_array().unwrap().len() == 8));
        assert_eq!(v["distance"], "1/8");
    }

    #[test]
    fn equal_elements_are_at_distance_zero() {
        let x = "tilde { step 1 [(0 1), ()] ; mpt 1 1 0 }";
        let v: Value = serde_json::from_str(&distances_json(x, x, 4, 0).unwrap()).unwrap();
        assert_eq!(v["lu_exact"], "0");
        assert!(distances_json("tilde {", x, 4, 0).unwrap_err().starts_with("first element"));
    }

    #[test]
    fn synthesis_certificates_pass() {
        let out = synthesize_json("step 1 [(0 1), (0 1 2)]", 3, 8, 8, "1/4", 3).unwrap();
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["equations_ok"], v["equations"]);
        assert_eq!(v["telescoping_ok"], true);
    }
}
