//! WebAssembly bindings for the lrlab browser demo.
//!
//! Every export takes and returns JSON text so the page needs no glue beyond
//! `JSON.parse`. The plain `*_json` functions carry the logic and are usable
//! off the web target.

use lrlab::models::examples::{nonreducible_lg, oscillatory, sqrt_diffusion};
use lrlab::models::LrModel;
use lrlab::numerics::DEFAULT_TOL;
use lrlab::pricing::{long_term_yield_analytic, yield_curve as curve};
use lrlab::simulation::{simulate_with_step, uniform_grid};
use lrlab::structure::analyze;
use serde_json::json;
use wasm_bindgen::prelude::*;

const MAX_PATHS: usize = 2_000;

fn parse(model_json: &str) -> Result<LrModel, String> {
    LrModel::from_json(model_json).map_err(|e| e.to_string())
}

/// Model document for one of the bundled models.
pub fn example_json(name: &str) -> Result<String, String> {
    let model = match name {
        "sqrt-diffusion" => sqrt_diffusion(),
        "nonreducible-lg" => nonreducible_lg(0.05, 0.03),
        "oscillatory" => oscillatory(2.0, 0.5, 0.03),
        _ => return Err(format!("unknown example `{name}`")),
    };
    Ok(model.to_json())
}

/// Yields at `points` evenly spaced maturities in `(0, horizon]` plus the
/// analytic long-term yield.
pub fn yield_curve_json(model_json: &str, horizon: f64, points: usize) -> Result<String, String> {
    let model = parse(model_json)?;
    if !(horizon > 0.0) || points == 0 {
        return Err("horizon and point count must be positive".into());
    }
    let maturities: Vec<f64> = (1..=points).map(|i| horizon * i as f64 / points as f64).collect();
    let c = curve(&model, &model.z0, 0.0, &maturities).map_err(|e| e.to_string())?;
    let long = long_term_yield_analytic(&model, DEFAULT_TOL);
    Ok(json!({
        "maturities": c.maturities,
        "discount_factors": c.discount_factors,
        "yields": c.yields,
        "long_term": long,
    })
    .to_string())
}

/// Structure report for a model document.
pub fn analyze_json(model_json: &str) -> Result<String, String> {
    let model = parse(model_json)?;
    Ok(analyze(&model, DEFAULT_TOL).map_err(|e| e.to_string())?.to_json())
}

/// Paths of the two-factor LG process and its long-term yield along each path.
///
/// The yield is `α − c` while the second factor is positive and `α` once it is
/// absorbed at zero.
pub fn two_factor_json(c: f64, alpha: f64, paths: usize, horizon: f64, seed: u64) -> Result<String, String> {
    if paths == 0 || paths > MAX_PATHS {
        return Err(format!("paths must lie in 1..={MAX_PATHS}"));
    }
    let model = nonreducible_lg(c, alpha);
    let grid = uniform_grid(horizon, horizon / 200.0).map_err(|e| e.to_string())?;
    let batch = simulate_with_step(&model, paths, &grid, seed, 1e-3).map_err(|e| e.to_string())?;
    let z2: Vec<Vec<f64>> = (0..paths)
        .map(|p| (0..batch.num_times()).map(|k| batch.state_slice(p, k)[1]).collect())
        .collect();
    let absorbed = z2.iter().filter(|row| *row.last().unwrap() <= 0.0).count();
    Ok(json!({
        "t": batch.time_grid,
        "z2": z2,
        "absorbed": absorbed,
        "yield_alive": alpha - c,
        "yield_absorbed": alpha,
    })
    .to_string())
}

fn js(r: Result<String, String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Bundled model as JSON.
#[wasm_bindgen]
pub fn example(name: &str) -> Result<String, JsError> {
    js(example_json(name))
}

#[wasm_bindgen]
pub fn yields(model_json: &str, horizon: f64, points: usize) -> Result<String, JsError> {
    js(yield_curve_json(model_json, horizon, points))
}

#[wasm_bindgen]
pub fn structure(model_json: &str) -> Result<String, JsError> {
    js(analyze_json(model_json))
}

#[wasm_bindgen]
pub fn two_factor(c: f64, alpha: f64, paths: usize, horizon: f64, seed: u32) -> Result<String, JsError> {
    js(two_factor_json(c, alpha, paths, horizon, seed as u64))
}
