//! Browser bindings for the static demo page in `www/`.
//!
//! The `*_json` and `*_values` functions are plain Rust so they can be tested
//! natively; the `#[wasm_bindgen]` wrappers only convert errors to strings.

use bonnet::config::RunConfig;
use bonnet::forms2d::{Grid, SweepOrder};
use bonnet::lax_psi::integrate_lax;
use bonnet::pipeline::Pipeline;
use bonnet::q_family::{QFamily, QKind};
use bonnet::{Error, Result};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest grid the page may request; keeps one frame under ~50 ms.
pub const MAX_NODES: usize = 96;

fn family(kind: &str, sign: i32, a: f64) -> Result<QFamily> {
    let kind = match kind {
        "rational" => QKind::Rational,
        "trig" => QKind::Trig,
        "hyper" => QKind::Hyper,
        other => return Err(Error::InvalidParameter(format!("unknown family kind {other:?}"))),
    };
    QFamily::new(kind, if sign < 0 { -1 } else { 1 }, a)
}

fn nodes(n: usize) -> Result<usize> {
    if (5..=MAX_NODES).contains(&n) {
        Ok(n)
    } else {
        Err(Error::InvalidParameter(format!("grid size must be in 5..={MAX_NODES}")))
    }
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

pub fn families_json(a: f64) -> Result<String> {
    let rows: Vec<Value> = QFamily::table(a)?
        .iter()
        .map(|f| {
            let (lo, hi) = f.domain();
            json!({
                "name": f.to_string(),
                "q": f.formula(),
                "domain": [finite_or_null(lo), finite_or_null(hi)],
                "kappa": f.kappa().ok(),
            })
        })
        .collect();
    Ok(Value::Array(rows).to_string())
}

/// `[s, Q, C]` triples over the guarded sample interval.
pub fn q_curve_values(kind: &str, sign: i32, a: f64, n: usize) -> Result<Vec<f64>> {
    let fam = family(kind, sign, a)?;
    let n = n.clamp(2, 2000);
    let (lo, hi) = fam.guard().sample_interval();
    let mut out = Vec::with_capacity(3 * n);
    for k in 0..n {
        let s = lo + (hi - lo) * k as f64 / (n - 1) as f64;
        out.extend([s, fam.q(s)?, fam.c(s)?]);
    }
    Ok(out)
}

/// ψ from the Lax pair on `[s_min, s_max] × [0, 1]`, row-major in `s`.
pub fn psi_values(kind: &str, sign: i32, a: f64, psi0: f64, s_min: f64, s_max: f64, n: usize) -> Result<Vec<f64>> {
    let fam = family(kind, sign, a)?;
    let n = nodes(n)?;
    let grid = Grid::new(s_min, s_max, 0.0, 1.0, n, n)?;
    Ok(integrate_lax(fam, grid, psi0)?.field().values().to_vec())
}

fn flatten(frame: &bonnet::surface_embed::FrameField) -> Vec<f64> {
    frame.positions().iter().flat_map(|p| [p.x, p.y, p.z]).collect()
}

/// The demo surface and its deformation at `t0`, with the comparison report.
pub fn surface_json(t0: f64, n: usize) -> Result<String> {
    if !t0.is_finite() {
        return Err(Error::InvalidParameter("t0 must be finite".into()));
    }
    let n = nodes(n)?;
    let mut cfg = RunConfig::demo();
    cfg.grid = Grid::new(1.0, 2.0, 0.0, 1.0, n, n)?;
    let p = Pipeline::build(&cfg, cfg.grid)?;
    let original = p.frame(SweepOrder::TEdgeFirst)?;
    let d = p.deform(t0)?;
    let h = cfg.grid.h();
    Ok(json!({
        "n": n,
        "original": flatten(&original),
        "deformed": flatten(&d.surface.frame),
        "report": {
            "t0": t0,
            "metric_deviation": d.report.metric_deviation,
            "H_deviation": d.report.h_deviation,
            "II_deviation": d.report.ii_deviation,
            "fd_tolerance": 25.0 * h * h,
        },
    })
    .to_string())
}

fn js(e: Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub fn families(a: f64) -> std::result::Result<String, JsValue> {
    families_json(a).map_err(js)
}

#[wasm_bindgen]
pub fn q_curve(kind: &str, sign: i32, a: f64, n: usize) -> std::result::Result<Vec<f64>, JsValue> {
    q_curve_values(kind, sign, a, n).map_err(js)
}

#[wasm_bindgen]
pub fn psi_field(
    kind: &str,
    sign: i32,
    a: f64,
    psi0: f64,
    s_min: f64,
    s_max: f64,
    n: usize,
) -> std::result::Result<Vec<f64>, JsValue> {
    psi_values(kind, sign, a, psi0, s_min, s_max, n).map_err(js)
}

#[wasm_bindgen]
pub fn surface(t0: f64, n: usize) -> std::result::Result<String, JsValue> {
    surface_json(t0, n).map_err(js)
}
