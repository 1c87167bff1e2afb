//! Browser bindings: sample a field in a disk and draw it, or estimate a
//! surface tension.

use polyfield::harness::{run_experiment, ExperimentConfig};
use polyfield::tension::{estimate_t, Environment, Mode, TensionOptions};
use polyfield::Point;
use wasm_bindgen::prelude::*;

fn js(e: polyfield::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn disk_run(kind: &str, beta: f64, radius: f64, seed: u64) -> Result<String, polyfield::Error> {
    let text = format!(
        "kind = \"{kind}\"\nseed = {seed}\n[field]\nbeta = {beta:?}\nwindow = {{ shape = \"disk\", center = {{ x = 0.0, y = 0.0 }}, radius = {radius:?} }}\n[schedule]\nreplicas = 1\n"
    );
    let out = run_experiment(&ExperimentConfig::from_toml_str(&text)?)?;
    out.svg().ok_or_else(|| polyfield::Error::Config("run produced no snapshot".into()))
}

/// SVG of one free-boundary Arak configuration in the disk of `radius`.
#[wasm_bindgen]
pub fn arak_svg(radius: f64, seed: u64) -> Result<String, JsError> {
    disk_run("arak", 2.0, radius, seed).map_err(js)
}

/// SVG of one sample of the length-interacting contour field at `beta`.
#[wasm_bindgen]
pub fn gibbs_svg(beta: f64, radius: f64, seed: u64) -> Result<String, JsError> {
    disk_run("gibbs", beta, radius, seed).map_err(js)
}

/// Finite-distance tension `-ln T / lambda` between balls of radius one
/// `lambda` apart, with walks in an empty environment.
#[wasm_bindgen]
pub fn tension(beta: f64, lambda: f64, walks: usize, seed: u64) -> Result<f64, JsError> {
    let opts = TensionOptions { walks_per_env: walks, environment: Environment::Empty, ..Default::default() };
    let e = estimate_t(Point::ORIGIN, Point::new(lambda, 0.0), 1.0, beta, 1, Mode::Infinite, &opts, seed).map_err(js)?;
    Ok(e.tau_lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_runs_draw() {
        let a = disk_run("arak", 2.0, 2.0, 1).unwrap();
        assert!(a.starts_with("<svg"));
        assert_eq!(a, disk_run("arak", 2.0, 2.0, 1).unwrap());
        let g = disk_run("gibbs", 5.0, 2.0, 1).unwrap();
        assert!(g.starts_with("<svg"));
        assert!(disk_run("gibbs", 1.0, 2.0, 1).is_err());
    }

    #[test]
    fn tension_is_positive() {
        let opts = TensionOptions { walks_per_env: 2000, environment: Environment::Empty, ..Default::default() };
        let e = estimate_t(Point::ORIGIN, Point::new(4.0, 0.0), 1.0, 5.0, 1, Mode::Infinite, &opts, 3).unwrap();
        assert!(e.tau_lambda > 0.0);
    }
}
