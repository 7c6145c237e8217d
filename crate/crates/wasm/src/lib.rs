//! Browser bindings. Each export has a plain-Rust twin (`*_impl`) that the
//! tests call natively; the exported wrapper only converts errors.

use missreg::experiments::{run_fig1, ExperimentConfig, ExperimentKind};
use missreg::impute::{ar1_impute_row, markov_blanket};
use missreg::{RngSeed, SparsityGraph};
use wasm_bindgen::prelude::*;

/// Largest problem the page will run; keeps a sweep under a few seconds.
const MAX_DIM: usize = 400;

fn js(e: String) -> JsError {
    JsError::new(&e)
}

/// Identity-design sweep. Returns `[alpha, err, min_err, max_err]` per alpha,
/// flattened.
#[wasm_bindgen]
pub fn fig1_sweep(
    n: usize,
    p: usize,
    trials: usize,
    alphas: Vec<f64>,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    fig1_sweep_impl(n, p, trials, &alphas, seed).map_err(js)
}

pub fn fig1_sweep_impl(
    n: usize,
    p: usize,
    trials: usize,
    alphas: &[f64],
    seed: u64,
) -> Result<Vec<f64>, String> {
    if n > MAX_DIM || p > MAX_DIM {
        return Err(format!("n and p are capped at {MAX_DIM} in the demo"));
    }
    let mut cfg = ExperimentConfig::desk(ExperimentKind::Fig1IdentityMcar);
    cfg.n = n;
    cfg.p = p;
    cfg.trials = trials;
    cfg.alpha_grid = alphas.to_vec();
    cfg.seed = RngSeed(seed);
    cfg.validate().map_err(|e| e.to_string())?;
    let rows = run_fig1(&cfg).map_err(|e| e.to_string())?;
    Ok(rows
        .iter()
        .flat_map(|r| [r.alpha, r.err, r.min_err, r.max_err])
        .collect())
}

/// AR(1) conditional mean of one row. `NaN` marks a missing entry; the
/// result has every entry filled.
#[wasm_bindgen]
pub fn ar1_row(values: Vec<f64>, phi: f64) -> Result<Vec<f64>, JsError> {
    ar1_row_impl(&values, phi).map_err(js)
}

pub fn ar1_row_impl(values: &[f64], phi: f64) -> Result<Vec<f64>, String> {
    if !(phi > -1.0 && phi < 1.0) {
        return Err(format!("phi must be in (-1, 1), got {phi}"));
    }
    let row: Vec<Option<f64>> = values.iter().map(|v| (!v.is_nan()).then_some(*v)).collect();
    Ok(ar1_impute_row(&row, phi))
}

/// Markov blanket of `node` in a banded graph. `observed[j] != 0` means
/// column `j` is observed.
#[wasm_bindgen]
pub fn blanket(bandwidth: usize, observed: Vec<u8>, node: usize) -> Result<Vec<u32>, JsError> {
    blanket_impl(bandwidth, &observed, node).map_err(js)
}

pub fn blanket_impl(bandwidth: usize, observed: &[u8], node: usize) -> Result<Vec<u32>, String> {
    let mask: Vec<bool> = observed.iter().map(|&m| m != 0).collect();
    let graph = SparsityGraph::banded(mask.len(), bandwidth);
    let b = markov_blanket(&graph, &mask, node).map_err(|e| e.to_string())?;
    Ok(b.blanket.iter().map(|&j| j as u32).collect())
}
