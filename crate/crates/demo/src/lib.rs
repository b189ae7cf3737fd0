//! Browser front end: three operations over a quiver given as JSON text.
//! Every entry point returns a JSON string; errors come back as `Err(message)`.

use quiver_moduli::flow::{classify_critical, flow_to_critical, FlowOptions, Termination};
use quiver_moduli::hn::{equivariant_ss_series, moduli_series, strata};
use quiver_moduli::io::{census_to_json, parse_list, parse_quiver_file, series_to_json, ParsedQuiver, RepFile};
use quiver_moduli::quiver::{DimensionVector, StabilityParam};
use quiver_moduli::replab::Lab;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Censuses in the page stay small so the tab does not hang.
pub const DEMO_BUDGET: u128 = 200_000;
pub const MAX_TRUNCATE: u32 = 200;

fn load(quiver: &str, dim: &str, theta: &str) -> Result<(ParsedQuiver, DimensionVector, StabilityParam), String> {
    let parsed = parse_quiver_file(quiver).map_err(|e| e.to_string())?;
    let dim = if dim.trim().is_empty() {
        parsed.defaults.dim.clone().ok_or("no dimension vector given")?
    } else {
        parse_list::<u32>(dim).map_err(|e| e.to_string())?
    };
    let theta = if theta.trim().is_empty() {
        parsed.defaults.theta.clone().ok_or("no stability parameter given")?
    } else {
        parse_list::<i64>(theta).map_err(|e| e.to_string())?
    };
    let q = &parsed.quiver;
    q.check_len(dim.len()).map_err(|e| e.to_string())?;
    q.check_len(theta.len()).map_err(|e| e.to_string())?;
    Ok((parsed, DimensionVector(dim), StabilityParam(theta)))
}

fn to_string(v: Value) -> String {
    serde_json::to_string(&v).expect("json values serialize")
}

/// Semistable (`moduli = false`) or moduli Poincaré series, plus the HN strata.
pub fn series(quiver: &str, dim: &str, theta: &str, truncate: u32, moduli: bool) -> Result<String, String> {
    if truncate > MAX_TRUNCATE {
        return Err(format!("truncation above {MAX_TRUNCATE} is not offered here"));
    }
    let (p, d, t) = load(quiver, dim, theta)?;
    let q = &p.quiver;
    let s = if moduli { moduli_series(q, &d, &t, truncate) } else { equivariant_ss_series(q, &d, &t, truncate) }
        .map_err(|e| e.to_string())?;
    let strata = strata(q, &d, &t)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|r| json!({"hn_type": r.hn_type.to_string(), "codim": r.codim}))
        .collect::<Vec<_>>();
    Ok(to_string(json!({"text": s.to_string(), "series": series_to_json(&s), "strata": strata})))
}

/// Counts representations over F_q by HN type and compares with the point counts of the strata.
pub fn census(quiver: &str, dim: &str, theta: &str, field: u32) -> Result<String, String> {
    let (p, d, t) = load(quiver, dim, theta)?;
    let lab = Lab::new(&p.quiver, field).map_err(|e| e.to_string())?.with_budget(DEMO_BUDGET);
    let report = lab.census(&d, &t).map_err(|e| e.to_string())?;
    Ok(to_string(census_to_json(&report)))
}

/// Runs the moment-map flow from a complex representation and returns its energy trace.
pub fn flow(quiver: &str, dim: &str, theta: &str, rep: &str, max_iters: usize) -> Result<String, String> {
    let (p, d, t) = load(quiver, dim, theta)?;
    let q = &p.quiver;
    let r = RepFile::parse(rep).and_then(|f| f.to_crep(q, Some(&d))).map_err(|e| e.to_string())?;
    let opts = FlowOptions { max_iters, ..FlowOptions::default() };
    let res = flow_to_critical(q, &r, &t, &opts).map_err(|e| e.to_string())?;
    let hn_type = if res.converged() {
        classify_critical(&res, 1e-6, 1e-4).ok().map(|c| c.hn_type.to_string())
    } else {
        None
    };
    let termination = match res.termination {
        Termination::Converged => "converged",
        Termination::MaxIters => "max-iters",
        Termination::Stalled => "stalled",
    };
    Ok(to_string(json!({
        "termination": termination,
        "iterations": res.iterations,
        "energy_trace": res.energy_trace,
        "residual": res.residual,
        "spectrum": res.beta_spectrum,
        "hn_type": hn_type,
    })))
}

#[wasm_bindgen(js_name = series)]
pub fn series_js(quiver: &str, dim: &str, theta: &str, truncate: u32, moduli: bool) -> Result<String, JsError> {
    series(quiver, dim, theta, truncate, moduli).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = census)]
pub fn census_js(quiver: &str, dim: &str, theta: &str, field: u32) -> Result<String, JsError> {
    census(quiver, dim, theta, field).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = flow)]
pub fn flow_js(quiver: &str, dim: &str, theta: &str, rep: &str, max_iters: u32) -> Result<String, JsError> {
    flow(quiver, dim, theta, rep, max_iters as usize).map_err(|e| JsError::new(&e))
}
