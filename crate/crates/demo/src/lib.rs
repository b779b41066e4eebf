//! Browser bindings. Every export returns a JSON string; the page in
//! `www/` draws it on a canvas.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use widthlab::curve::{Mass, PolyCurve};
use widthlab::surface::geodesic_shoot;
use widthlab::sweepout::{evaluate_cycle, ProjectiveParam, SweepoutFamily};
use widthlab::widths::{candidate_table, counterexample_report, width_assignment, IndexOptions};
use widthlab::{EllipsoidParams, SurfacePoint, TangentVector, Vec3};

fn points(c: &PolyCurve) -> Value {
    Value::Array(c.vertices().iter().map(|v| json!([v[0], v[1], v[2]])).collect())
}

fn js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

/// Zero set of `Σ q_i b_i` for the degree-`k` sweepout on the ellipsoid:
/// `{curves: [[[x,y,z],...],...], mass, resolved}`.
pub fn zero_set_json(a: [f64; 3], k: usize, q: &[f64], level: u32) -> Result<Value, String> {
    let surface = EllipsoidParams::new(a[0], a[1], a[2]).map_err(|e| e.to_string())?;
    let family = SweepoutFamily::standard(k, surface).map_err(|e| e.to_string())?;
    if q.len() != family.basis().len() {
        return Err(format!("F{k} takes {} coefficients, got {}", family.basis().len(), q.len()));
    }
    let q = ProjectiveParam::new(q.to_vec()).map_err(|e| e.to_string())?;
    let contour = evaluate_cycle(&family, &q, level).map_err(|e| e.to_string())?;
    let curves: Vec<Value> = contour.cycle.curves().iter().map(points).collect();
    Ok(json!({
        "curves": curves,
        "mass": contour.cycle.mass(),
        "resolved": contour.resolved(),
        "basis": family.basis().iter().map(|m| m.name()).collect::<Vec<_>>(),
    }))
}

/// Arc-length geodesic from `p` (projected to the surface) in direction
/// `v`: `{points, length, curvature_range}`.
pub fn geodesic_json(a: [f64; 3], p: [f64; 3], v: [f64; 3], length: f64) -> Result<Value, String> {
    let surface = EllipsoidParams::new(a[0], a[1], a[2]).map_err(|e| e.to_string())?;
    let base = SurfacePoint::new(&surface, Vec3::from(p)).map_err(|e| e.to_string())?;
    let start = TangentVector::direction(&surface, base, Vec3::from(v)).map_err(|e| e.to_string())?;
    let g = geodesic_shoot(&surface, &start, length, 0.01).map_err(|e| e.to_string())?;
    let k: Vec<f64> = g.vertices().iter().map(|x| surface.gauss_curvature(x)).collect();
    let (lo, hi) = k.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &c| (l.min(c), h.max(c)));
    Ok(json!({ "points": points(&g), "length": g.length(), "curvature_range": [lo, hi] }))
}

/// Candidate table, width assignment and counterexample report.
pub fn width_table_json(a: [f64; 3]) -> Result<Value, String> {
    let surface = EllipsoidParams::new(a[0], a[1], a[2]).map_err(|e| e.to_string())?;
    let table = candidate_table(&surface, IndexOptions::default()).map_err(|e| e.to_string())?;
    let assignment = width_assignment(&table);
    let report = if assignment.ambiguous {
        Value::Null
    } else {
        serde_json::to_value(counterexample_report(&table, &assignment).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?
    };
    Ok(json!({ "table": table, "assignment": assignment, "counterexample": report }))
}

#[wasm_bindgen]
pub fn zero_set(a1: f64, a2: f64, a3: f64, k: usize, q: Vec<f64>, level: u32) -> Result<String, JsValue> {
    js(zero_set_json([a1, a2, a3], k, &q, level))
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn geodesic(a1: f64, a2: f64, a3: f64, px: f64, py: f64, pz: f64, vx: f64, vy: f64, vz: f64, length: f64) -> Result<String, JsValue> {
    js(geodesic_json([a1, a2, a3], [px, py, pz], [vx, vy, vz], length))
}

#[wasm_bindgen]
pub fn width_table(a1: f64, a2: f64, a3: f64) -> Result<String, JsValue> {
    js(width_table_json([a1, a2, a3]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equator_zero_set() {
        let v = zero_set_json([1.0, 1.0, 1.0], 3, &[0.0, 0.0, 0.0, 1.0], 5).unwrap();
        assert!((v["mass"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-2);
        assert_eq!(v["resolved"], true);
        assert_eq!(v["curves"].as_array().unwrap().len(), 1);
    }

    #[test]
    fn wrong_coefficient_count_is_an_error() {
        assert!(zero_set_json([1.0, 1.0, 1.0], 2, &[1.0, 0.0], 5).is_err());
    }

    #[test]
    fn geodesic_has_the_requested_length() {
        let v = geodesic_json([0.95, 1.0, 1.05], [1.0, 0.0, 0.0], [0.0, 1.0, 0.3], 3.0).unwrap();
        assert!((v["length"].as_f64().unwrap() - 3.0).abs() < 1e-9);
        assert!(v["points"].as_array().unwrap().len() > 100);
    }

    #[test]
    fn width_table_on_near_round() {
        let v = width_table_json([0.95, 1.0, 1.05]).unwrap();
        assert_eq!(v["table"]["rows"].as_array().unwrap().len(), 9);
        assert_eq!(v["counterexample"]["verdict"], "Question 1 violated");
        let round = width_table_json([1.0, 1.0, 1.0]).unwrap();
        assert!(round["counterexample"].is_null());
    }
}
