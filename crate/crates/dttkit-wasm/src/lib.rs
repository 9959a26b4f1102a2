//! Browser bindings for dttkit.
//!
//! Three operations are exported to JavaScript:
//!
//! * [`plan_tree`] — the rule tree a strategy picks for a transform;
//! * [`cost_table`] — plan cost against the closed form over a list of sizes;
//! * [`apply_transform`] — run the fast algorithm on a vector and report its
//!   deviation from the dense definition.
//!
//! Each has a plain-Rust twin (`*_impl`) returning `Result<_, String>` so the
//! logic can be tested natively; the exported wrappers only convert errors.

use wasm_bindgen::prelude::*;

use dttkit::planner::{cost_report_text, resolve, CostRow, Planner, Strategy};
use dttkit::reference::{parse_rational, real_matrix, TransformId};

/// Largest size the demo will plan, to keep the page responsive.
pub const DEMO_MAX_N: usize = 1024;

fn transform(spec: &str, n: usize, r: &str) -> Result<TransformId, String> {
    if n == 0 || n > DEMO_MAX_N {
        return Err(format!("size must be between 1 and {DEMO_MAX_N}"));
    }
    let mut t = TransformId::parse_spec(spec.trim(), n).map_err(|e| e.to_string())?;
    if t.is_dft() {
        return Err("the demo covers the real trigonometric transforms only".into());
    }
    let r = r.trim();
    if !r.is_empty() {
        let q = parse_rational(r).ok_or_else(|| format!("bad skew parameter {r:?}"))?;
        t = t.with_skew(q);
    }
    t.validate().map_err(|e| e.to_string())?;
    Ok(t)
}

fn planner(strategy: &str) -> Result<Planner, String> {
    let s: Strategy = strategy
        .trim()
        .parse()
        .map_err(|e: dttkit::planner::PlanError| e.to_string())?;
    Ok(Planner::new(s))
}

/// Rule tree of the plan, one node per line with its cost triple.
pub fn plan_tree_impl(spec: &str, n: usize, r: &str, strategy: &str) -> Result<String, String> {
    let t = transform(spec, n, r)?;
    let p = planner(strategy)?.plan(&t).map_err(|e| e.to_string())?;
    Ok(p.tree())
}

/// Aligned cost table for the sizes in `sizes` (comma or space separated,
/// ranges `a..b` allowed).
pub fn cost_table_impl(spec: &str, sizes: &str, r: &str, strategy: &str) -> Result<String, String> {
    let args: Vec<String> = sizes.split_whitespace().map(String::from).collect();
    let ns = dttkit::cli::parse_sizes(&args)?;
    let mut planner = planner(strategy)?;
    let mut rows = Vec::with_capacity(ns.len());
    for n in ns {
        let t = transform(spec, n, r)?;
        let p = planner.plan(&t).map_err(|e| e.to_string())?;
        rows.push(CostRow::from_plan(&p));
    }
    Ok(cost_report_text(&rows))
}

/// Result of running a planned algorithm on one input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Applied {
    pub output: Vec<f64>,
    /// Largest absolute difference from the dense definition times `x`.
    pub max_deviation: f64,
}

pub fn apply_impl(spec: &str, r: &str, strategy: &str, x: &[f64]) -> Result<Applied, String> {
    let t = transform(spec, x.len(), r)?;
    let p = planner(strategy)?.plan(&t).map_err(|e| e.to_string())?;
    let f = resolve::<f64>(&p).map_err(|e| e.to_string())?;
    let output = f.apply(x).map_err(|e| e.to_string())?;
    let m = real_matrix(&t).map_err(|e| e.to_string())?;
    let max_deviation = (0..t.n)
        .map(|i| {
            let want: f64 = (0..t.n).map(|j| m[(i, j)] * x[j]).sum();
            (want - output[i]).abs()
        })
        .fold(0.0, f64::max);
    Ok(Applied {
        output,
        max_deviation,
    })
}

/// Rule tree chosen by `strategy` for the transform `spec` of size `n`
/// (skew `r` as `p/q`, or empty).
#[wasm_bindgen]
pub fn plan_tree(spec: &str, n: usize, r: &str, strategy: &str) -> Result<String, JsError> {
    plan_tree_impl(spec, n, r, strategy).map_err(|e| JsError::new(&e))
}

/// Cost table (plan vs closed form) over a size list such as `"2 4 8 16"`.
#[wasm_bindgen]
pub fn cost_table(spec: &str, sizes: &str, r: &str, strategy: &str) -> Result<String, JsError> {
    cost_table_impl(spec, sizes, r, strategy).map_err(|e| JsError::new(&e))
}

/// Apply the fast algorithm to `x`. Returns the output followed by one extra
/// element: the largest deviation from the dense definition.
#[wasm_bindgen]
pub fn apply_transform(
    spec: &str,
    r: &str,
    strategy: &str,
    x: &[f64],
) -> Result<Vec<f64>, JsError> {
    let a = apply_impl(spec, r, strategy, x).map_err(|e| JsError::new(&e))?;
    let mut out = a.output;
    out.push(a.max_deviation);
    Ok(out)
}
