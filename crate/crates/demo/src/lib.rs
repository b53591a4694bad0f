//! Browser bindings: new spectrum of a sampled lift, the deviation function
//! with its lower bounds, and matching probabilities exact against
//! asymptotic. Each operation returns a JSON string.

use std::sync::Arc;

use randlift::graph::BaseGraph;
use randlift::matchprob::{
    bigbound_form, corollary_bound, corollary_constant, exact_probability, stirling_interval,
    MatchingSpec,
};
use randlift::pattern::deviation::{
    b_function, large_deviation_lower_bound, small_deviation_lower_bound, LARGE_DEVIATION_THRESHOLD,
};
use randlift::sampler::{sample_lift, SeededRng};
use randlift::spectrum::{dense_lambda_star, new_spectrum};
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest lift the page will diagonalise.
pub const MAX_ORDER: usize = 800;

/// Largest number of curve points per request.
pub const MAX_POINTS: usize = 20_000;

fn base_graph(family: &str, h: usize) -> Result<BaseGraph, String> {
    let g = match family {
        "complete" => BaseGraph::complete(h),
        "petersen" => Ok(BaseGraph::petersen()),
        "cycle2" => BaseGraph::cycle_power(h, 2),
        other => return Err(format!("unknown base family `{other}`")),
    };
    g.map_err(|e| e.to_string())
}

/// New eigenvalues of a random `n`-lift, `lambda*` and the Ramanujan bound.
pub fn spectrum_json(family: &str, h: usize, n: usize, seed: u64) -> Result<String, String> {
    let base = Arc::new(base_graph(family, h)?);
    let order = base.order() * n;
    if n == 0 || order > MAX_ORDER {
        return Err(format!("need 1 <= n and n h <= {MAX_ORDER}"));
    }
    let d = base.degree();
    let lift = sample_lift(base, n, &SeededRng::new(seed, 0)).map_err(|e| e.to_string())?;
    let eigenvalues = new_spectrum(&lift).map_err(|e| e.to_string())?;
    let report = dense_lambda_star(&lift).map_err(|e| e.to_string())?;
    Ok(json!({
        "h": lift.h(),
        "d": d,
        "n": n,
        "eigenvalues": eigenvalues,
        "lambda_star": report.lambda_star,
        "ramanujan": 2.0 * ((d - 1) as f64).sqrt(),
    })
    .to_string())
}

/// `b(eps)` on a grid over `[lo, hi]` with the piecewise lower bound
/// (`eps^2 / 15` up to `e^2 - 1`, `(1 + eps/2) ln(1 + eps)` beyond).
pub fn deviation_json(lo: f64, hi: f64, points: usize) -> Result<String, String> {
    if !(lo >= -1.0 && hi > lo && hi.is_finite()) || !(2..=MAX_POINTS).contains(&points) {
        return Err(format!(
            "need -1 <= lo < hi and 2 <= points <= {MAX_POINTS}"
        ));
    }
    let mut eps = Vec::with_capacity(points);
    let mut b = Vec::with_capacity(points);
    let mut bound = Vec::with_capacity(points);
    for k in 0..points {
        let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        eps.push(x);
        b.push(b_function(x).map_err(|e| e.to_string())?);
        bound.push(if x <= LARGE_DEVIATION_THRESHOLD {
            small_deviation_lower_bound(x)
        } else {
            large_deviation_lower_bound(x)
        });
    }
    Ok(
        json!({"eps": eps, "b": b, "lower_bound": bound, "threshold": LARGE_DEVIATION_THRESHOLD})
            .to_string(),
    )
}

fn parse_list(text: &str) -> Result<Vec<u64>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| format!("`{t}` is not a nonnegative integer"))
        })
        .collect()
}

/// Exact and asymptotic probabilities of a matching spec. `e` lists the
/// rows separated by `;`.
pub fn matching_json(n: u64, a: &str, b: &str, e: &str) -> Result<String, String> {
    let rows = e
        .split(';')
        .map(parse_list)
        .collect::<Result<Vec<_>, _>>()?;
    let spec =
        MatchingSpec::new(n, parse_list(a)?, parse_list(b)?, rows).map_err(|e| e.to_string())?;
    let exact = exact_probability(&spec).map_err(|e| e.to_string())?;
    let big = bigbound_form(&spec).map_err(|e| e.to_string())?;
    let (lo, hi) = stirling_interval(&spec).map_err(|e| e.to_string())?;
    let corollary = corollary_bound(&spec).map_err(|e| e.to_string())?;
    Ok(json!({
        "exact": exact.value(),
        "ln_exact": exact.ln_p,
        "rational": exact.rational.map(|r| r.to_string()),
        "asymptotic": big.ln_asymptotic().exp(),
        "ln_asymptotic": big.ln_asymptotic(),
        "exponent": big.exponent,
        "ratio_interval": [lo.exp(), hi.exp()],
        "corollary_bound": (corollary + corollary_constant(spec.a.len(), spec.b.len())).exp(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn lift_spectrum(family: &str, h: usize, n: usize, seed: u64) -> Result<String, JsValue> {
    spectrum_json(family, h, n, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn deviation_curve(lo: f64, hi: f64, points: usize) -> Result<String, JsValue> {
    deviation_json(lo, hi, points).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn matching_probability(n: u64, a: &str, b: &str, e: &str) -> Result<String, JsValue> {
    matching_json(n, a, b, e).map_err(|e| JsValue::from_str(&e))
}
