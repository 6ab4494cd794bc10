//! Browser bindings. Every export returns a JSON string so the page needs
//! no generated type glue beyond `JSON.parse`.

use ofbm::estim::estimate_all;
use ofbm::experiment::{log_scale_diagram, Preset};
use ofbm::model::{WaveletSpectrum, DEFAULT_RESOLUTION};
use ofbm::synth::OfgnGenerator;
use ofbm::wavelet::{cascade_psi, daubechies_filters, default_octave_range, max_octave, pyramid, wavelet_variance, Variant};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn fail(e: ofbm::Error) -> JsValue {
    JsValue::from_str(&json!({ "kind": e.kind(), "message": e.to_string() }).to_string())
}

fn preset(name: &str) -> Result<Preset, JsValue> {
    name.parse().map_err(fail)
}

/// Synthesizes one path of `2^log2_len` increments and returns its
/// log-scale diagram with per-octave eigenvalue estimates.
#[wasm_bindgen]
pub fn synthesize_and_analyze(preset_name: &str, log2_len: u32, seed: u32) -> Result<String, JsValue> {
    if !(8..=18).contains(&log2_len) {
        return Err(JsValue::from_str("log2_len must lie in [8, 18]"));
    }
    let params = preset(preset_name)?.params();
    let filters = daubechies_filters(2, Variant::LeastAsymmetric).map_err(fail)?;
    let path = OfgnGenerator::new(&params, 1 << log2_len).map_err(fail)?.generate_levels(seed.into());
    let c = pyramid(&path, &filters, max_octave(path.len, 2)).map_err(fail)?;
    let (lo, hi) = default_octave_range(&c).ok_or_else(|| JsValue::from_str("path too short"))?;
    let wv = wavelet_variance(&c, lo, hi).map_err(fail)?;
    let diagram = log_scale_diagram(&wv).map_err(fail)?;
    let estimates = estimate_all(&wv, None);
    Ok(json!({ "h": params.hurst().h(), "diagram": diagram, "estimates": estimates }).to_string())
}

/// Cascade approximation of φ and ψ on `[0, 2N_ψ - 1]`, decimated to
/// between `points` and `2 points` samples.
#[wasm_bindgen]
pub fn wavelet_shape(n_psi: usize, variant_name: &str, resolution: u32, points: usize) -> Result<String, JsValue> {
    let filters = daubechies_filters(n_psi, variant_name.parse().map_err(fail)?).map_err(fail)?;
    let t = cascade_psi(&filters, resolution).map_err(fail)?;
    let step = (t.psi.len() / points.max(2)).max(1);
    let grid: Vec<f64> = t.grid().into_iter().step_by(step).collect();
    let pick = |v: &[f64]| v.iter().step_by(step).copied().collect::<Vec<f64>>();
    Ok(json!({
        "t": grid,
        "phi": pick(&t.phi),
        "psi": pick(&t.psi),
        "energy": t.psi_energy(),
        "h": filters.h,
        "g": filters.g,
    })
    .to_string())
}

/// Analytic centers `h_pᴱ(2^j)` and `θ(2^j)` for octaves `j_min..=j_max`.
#[wasm_bindgen]
pub fn theoretical_curves(preset_name: &str, j_min: u32, j_max: u32) -> Result<String, JsValue> {
    if j_min == 0 || j_max < j_min || j_max > 40 {
        return Err(JsValue::from_str("octaves must satisfy 1 <= j_min <= j_max <= 40"));
    }
    let params = preset(preset_name)?.params();
    let filters = daubechies_filters(2, Variant::LeastAsymmetric).map_err(fail)?;
    let t = cascade_psi(&filters, DEFAULT_RESOLUTION).map_err(fail)?;
    let spec = WaveletSpectrum::new(&params, &t).map_err(fail)?;
    let mut rows = Vec::new();
    for j in j_min..=j_max {
        let h = spec.eigen_h_at((j as f64).exp2()).map_err(fail)?;
        let theta = if params.n() == 2 {
            spec.theoretical_eigen_h(j, 1).ok().map(|c| c.theta)
        } else {
            None
        };
        rows.push(json!({ "j": j, "h": h, "theta": theta }));
    }
    Ok(json!({ "h": params.hurst().h(), "curves": rows }).to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> serde_json::Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn analysis_reports_every_octave() {
        let v = parse(&synthesize_and_analyze("fig2", 12, 1).unwrap());
        let octaves = v["diagram"]["octaves"].as_array().unwrap();
        assert_eq!(octaves.first().unwrap(), 3);
        assert_eq!(v["estimates"]["scales"].as_array().unwrap().len(), octaves.len());
    }

    #[test]
    fn wavelet_shape_is_decimated_and_unit_energy() {
        let v = parse(&wavelet_shape(3, "extremal-phase", 10, 200).unwrap());
        let n = v["psi"].as_array().unwrap().len();
        assert!(n <= 400 && n >= 200, "{n}");
        assert!((v["energy"].as_f64().unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn curves_approach_the_hurst_eigenvalues() {
        let v = parse(&theoretical_curves("fig2", 4, 30).unwrap());
        let last = &v["curves"].as_array().unwrap().last().unwrap()["h"];
        assert!((last[1].as_f64().unwrap() - 0.85).abs() < 0.01);
        assert!(last[0].as_f64().unwrap() > 0.2);
    }
}
