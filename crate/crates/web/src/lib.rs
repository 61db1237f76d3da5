//! Browser bindings: calibrate a small landscape, query interpolated pulses,
//! and score a test lattice. Everything runs single-threaded in the page.

use landscape_core::calib::{calibrate, CalibConfig, Landscape};
use landscape_core::eval::{evaluate_grid, evaluate_point, interpolate_located};
use landscape_core::format;
use landscape_core::gatefam::{GateFamily, Granularity, ParamPoint};
use landscape_core::Result;
use serde_json::json;
use wasm_bindgen::prelude::*;

/// Largest reference lattice the page will calibrate; finer ones take minutes.
const MAX_REFERENCES: usize = 64;

#[wasm_bindgen]
pub struct WebLandscape {
    inner: Landscape,
}

fn js(e: landscape_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
impl WebLandscape {
    /// Calibrates `family` at `granularity` (e.g. "1/3") with `rounds` re-optimization rounds.
    #[wasm_bindgen(constructor)]
    pub fn new(family: &str, granularity: &str, rounds: usize, seed: u64) -> std::result::Result<WebLandscape, JsError> {
        calibrate_small(family, granularity, rounds, seed).map(|inner| WebLandscape { inner }).map_err(js)
    }

    #[wasm_bindgen(js_name = fromJson)]
    pub fn from_json(text: &str) -> std::result::Result<WebLandscape, JsError> {
        format::from_json(text).map(|inner| WebLandscape { inner }).map_err(js)
    }

    #[wasm_bindgen(js_name = toJson)]
    pub fn to_json(&self) -> std::result::Result<String, JsError> {
        format::to_json(&self.inner).map_err(js)
    }

    /// Per-round log and reference points as JSON.
    pub fn summary(&self) -> String {
        summary_json(&self.inner)
    }

    /// Interpolated pulse at `(x, y, z)` as JSON.
    pub fn interpolate(&self, x: f64, y: f64, z: f64) -> std::result::Result<String, JsError> {
        interpolate_json(&self.inner, x, y, z).map_err(js)
    }

    /// Infidelity on every point of the test lattice as JSON.
    pub fn evaluate(&self, granularity: &str) -> std::result::Result<String, JsError> {
        evaluate_json(&self.inner, granularity).map_err(js)
    }
}

pub fn calibrate_small(family: &str, granularity: &str, rounds: usize, seed: u64) -> Result<Landscape> {
    let family = GateFamily::from_name(family)?;
    let granularity: Granularity = granularity.parse()?;
    let n = family.reference_points(granularity).len();
    if n > MAX_REFERENCES {
        return Err(landscape_core::Error::InvalidConfig(format!(
            "{n} reference points; the demo allows at most {MAX_REFERENCES}"
        )));
    }
    let mut cfg = CalibConfig::new(family, granularity);
    cfg.rounds = rounds;
    cfg.seed = seed;
    calibrate(&cfg)
}

pub fn summary_json(l: &Landscape) -> String {
    let points: Vec<&[f64]> = l.references.iter().map(|r| r.point.coords()).collect();
    json!({
        "family": l.family.name(),
        "granularity": l.granularity.to_string(),
        "references": points,
        "log": l.log,
    })
    .to_string()
}

pub fn interpolate_json(l: &Landscape, x: f64, y: f64, z: f64) -> Result<String> {
    let p = ParamPoint::new(vec![x, y, z]);
    let (alpha, loc) = interpolate_located(l, &p)?;
    let record = evaluate_point(l, &p)?;
    let controls: Vec<&[f64]> = (0..l.ansatz.n_controls).map(|k| alpha.control(&l.ansatz, k)).collect();
    Ok(json!({
        "point": [x, y, z],
        "controls": controls,
        "duration": l.ansatz.duration,
        "infidelity": record.infidelity,
        "simplex": loc.simplex,
        "vertices": l.mesh.simplices()[loc.simplex],
        "barycentric": loc.coords,
    })
    .to_string())
}

pub fn evaluate_json(l: &Landscape, granularity: &str) -> Result<String> {
    let (records, summary) = evaluate_grid(l, granularity.parse()?)?;
    let points: Vec<(&[f64], f64)> = records.iter().map(|r| (r.point.coords(), r.infidelity)).collect();
    Ok(json!({ "summary": summary, "points": points }).to_string())
}
