//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each operation has a plain Rust function (tested natively) and a thin
//! `#[wasm_bindgen]` wrapper that flattens the result for JavaScript.

use chaoscope_core::bifurcation::{self, ScanSettings};
use chaoscope_core::corrdim::{self, Metric, RadiusGrid};
use chaoscope_core::lyapunov;
use chaoscope_core::map::{self, MapParams};
use wasm_bindgen::prelude::*;

/// Bifurcation diagram as interleaved `[q0, v0, q1, v1, ...]`; diverged
/// columns contribute one `(q, NaN)` pair.
pub fn bifurcation_points(k: f64, q_min: f64, q_max: f64, q_steps: usize, samples: usize) -> Result<Vec<f64>, String> {
    let mut s = ScanSettings::new(k, q_min, q_max, q_steps);
    s.samples = samples;
    let scan = bifurcation::scan(&s).map_err(|e| e.to_string())?;
    Ok(scan.rows().flat_map(|(q, v)| [q, v]).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attractor {
    pub phi: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
}

/// Phase portrait after the default transient, plus Lyapunov exponents over
/// `lce_steps` iterations.
pub fn attractor(k: f64, q: f64, points: usize, lce_steps: usize) -> Result<Attractor, String> {
    let p = MapParams::new(k, q).map_err(|e| e.to_string())?;
    let o = map::orbit(&p, &map::DEFAULT_INITIAL, map::DEFAULT_TRANSIENT, points, true).map_err(|e| e.to_string())?;
    let s = lyapunov::lce_series(&p, &map::DEFAULT_INITIAL, map::DEFAULT_TRANSIENT, lce_steps).map_err(|e| e.to_string())?;
    Ok(Attractor {
        phi: o.points.iter().map(|s| s.phi).collect(),
        v: o.points.iter().map(|s| s.v).collect(),
        lambda1: s.lambda1,
        lambda2: s.lambda2,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correlation {
    pub log10_r: Vec<f64>,
    pub log10_c: Vec<f64>,
    /// `None` when no scaling window was found.
    pub fit: Option<(f64, f64, f64, f64)>,
}

/// Correlation curve of the attractor on the default radius grid, with the
/// automatic fit as `(slope, log10 intercept, window_low, window_high)`.
pub fn correlation(k: f64, q: f64, points: usize) -> Result<Correlation, String> {
    let p = MapParams::new(k, q).map_err(|e| e.to_string())?;
    let o = map::orbit(&p, &map::DEFAULT_INITIAL, map::DEFAULT_TRANSIENT, points, true).map_err(|e| e.to_string())?;
    let curve = corrdim::correlation_curve(&o, RadiusGrid::default(), Metric::Toroidal).map_err(|e| e.to_string())?;
    let fit = corrdim::fit_correlation_dimension(&curve, None).ok().map(|f| {
        (f.slope, f.intercept / std::f64::consts::LN_10, f.fit_window.0, f.fit_window.1)
    });
    Ok(Correlation {
        log10_r: curve.points.iter().map(|p| p.0.log10()).collect(),
        log10_c: curve.points.iter().map(|p| p.1.log10()).collect(),
        fit,
    })
}

#[wasm_bindgen(js_name = bifurcation)]
pub fn bifurcation_js(k: f64, q_min: f64, q_max: f64, q_steps: usize, samples: usize) -> Result<Vec<f64>, JsError> {
    bifurcation_points(k, q_min, q_max, q_steps, samples).map_err(|e| JsError::new(&e))
}

/// `[lambda1, lambda2, phi0, v0, phi1, v1, ...]`
#[wasm_bindgen(js_name = attractor)]
pub fn attractor_js(k: f64, q: f64, points: usize, lce_steps: usize) -> Result<Vec<f64>, JsError> {
    let a = attractor(k, q, points, lce_steps).map_err(|e| JsError::new(&e))?;
    let mut flat = vec![a.lambda1, a.lambda2];
    flat.extend(a.phi.iter().zip(&a.v).flat_map(|(x, y)| [*x, *y]));
    Ok(flat)
}

/// `[slope, intercept, window_low, window_high, log10_r0, log10_C0, ...]`;
/// the first four are NaN when no fit window exists.
#[wasm_bindgen(js_name = correlation)]
pub fn correlation_js(k: f64, q: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let c = correlation(k, q, points).map_err(|e| JsError::new(&e))?;
    let (s, b, lo, hi) = c.fit.unwrap_or((f64::NAN, f64::NAN, f64::NAN, f64::NAN));
    let mut flat = vec![s, b, lo, hi];
    flat.extend(c.log10_r.iter().zip(&c.log10_c).flat_map(|(x, y)| [*x, *y]));
    Ok(flat)
}
