//! Browser bindings for the demo page in `www/`.
//!
//! Each export has a plain Rust twin returning `Result<_, String>` so the
//! numerics can be tested natively; the exports only convert errors.

// `!(x > 0.0)` guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use nalgebra::DMatrix;
use omega_core::elliptical::{AxisRange, Generator, UnivariateLaw};
use omega_core::omega::{existence_check, omega_curve};
use omega_core::portfolio::{equivalence_report, random_candidates, ConstraintSet};
use omega_core::{EllipticalModel, TargetVolatility};
use wasm_bindgen::prelude::*;

/// Half-width of the density window in units of each scale.
const DENSITY_HALF_WIDTH: f64 = 4.0;

pub fn generator(kind: &str, nu: f64) -> Result<Generator, String> {
    match kind {
        "normal" => Ok(Generator::normal()),
        "student_t" => Generator::student_t(nu).map_err(|e| e.to_string()),
        "cauchy" => Ok(Generator::cauchy()),
        other => Err(format!("unknown generator `{other}`")),
    }
}

/// `count` thresholds followed by one block of `count` Omega values per law.
/// `+∞` and undefined values come back as `Infinity` and `NaN`.
pub fn curves(
    mus: &[f64],
    sigmas: &[f64],
    kind: &str,
    nu: f64,
    theta_min: f64,
    theta_max: f64,
    count: usize,
) -> Result<Vec<f64>, String> {
    if mus.len() != sigmas.len() || mus.is_empty() {
        return Err(format!("{} locations for {} scales", mus.len(), sigmas.len()));
    }
    let g = generator(kind, nu)?;
    let existence = existence_check(&g);
    if !existence.is_defined() {
        return Err(format!("Omega is {existence}"));
    }
    let laws = mus
        .iter()
        .zip(sigmas)
        .enumerate()
        .map(|(i, (m, s))| UnivariateLaw::new(*m, *s, g.clone()).map(|l| (format!("law{}", i + 1), l)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let grid = AxisRange::new(theta_min, theta_max, count).map_err(|e| e.to_string())?;
    let curve = omega_curve(&laws, &grid).map_err(|e| e.to_string())?;
    let mut out = curve.thetas.clone();
    for column in &curve.columns {
        out.extend(column.values.iter().map(|v| v.as_f64()));
    }
    Ok(out)
}

/// `n × n` bivariate density over `μᵢ ± 4σᵢ`, row `i` at the `i`-th `x`.
#[allow(clippy::too_many_arguments)]
pub fn density(
    mu1: f64,
    mu2: f64,
    sigma1: f64,
    sigma2: f64,
    rho: f64,
    kind: &str,
    nu: f64,
    n: usize,
) -> Result<Vec<f64>, String> {
    let cov = covariance(&[sigma1, sigma2], rho)?;
    let model = EllipticalModel::new(vec![mu1, mu2], cov, generator(kind, nu)?).map_err(|e| e.to_string())?;
    let axis = |m: f64, s: f64| AxisRange::new(m - DENSITY_HALF_WIDTH * s, m + DENSITY_HALF_WIDTH * s, n);
    let x = axis(mu1, sigma1).map_err(|e| e.to_string())?;
    let y = axis(mu2, sigma2).map_err(|e| e.to_string())?;
    Ok(model.density_grid(&x, &y).map_err(|e| e.to_string())?.values)
}

/// Argmax comparison on the volatility slice, as CSV
/// `theta,argmax_omega,argmax_sharpe,agree`.
#[allow(clippy::too_many_arguments)]
pub fn equivalence(
    mus: &[f64],
    sigmas: &[f64],
    rho: f64,
    kind: &str,
    nu: f64,
    target_vol: f64,
    n_candidates: usize,
    seed: u64,
    theta_min: f64,
    theta_max: f64,
    count: usize,
) -> Result<String, String> {
    if mus.len() != sigmas.len() {
        return Err(format!("{} locations for {} scales", mus.len(), sigmas.len()));
    }
    let model = EllipticalModel::new(mus.to_vec(), covariance(sigmas, rho)?, generator(kind, nu)?)
        .map_err(|e| e.to_string())?;
    let vol = TargetVolatility::new(target_vol).map_err(|e| e.to_string())?;
    let set = random_candidates(mus.len(), n_candidates, vol, &model, seed, &ConstraintSet::default())
        .map_err(|e| e.to_string())?;
    let grid = AxisRange::new(theta_min, theta_max, count).map_err(|e| e.to_string())?;
    let report = equivalence_report(&model, &set.candidates, &grid, vol).map_err(|e| e.to_string())?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).map_err(|e| e.to_string())?;
    String::from_utf8(csv).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = omegaCurves)]
pub fn omega_curves_js(
    mus: &[f64],
    sigmas: &[f64],
    kind: &str,
    nu: f64,
    theta_min: f64,
    theta_max: f64,
    count: usize,
) -> Result<Vec<f64>, JsError> {
    curves(mus, sigmas, kind, nu, theta_min, theta_max, count).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = densityGrid)]
#[allow(clippy::too_many_arguments)]
pub fn density_grid_js(
    mu1: f64,
    mu2: f64,
    sigma1: f64,
    sigma2: f64,
    rho: f64,
    kind: &str,
    nu: f64,
    n: usize,
) -> Result<Vec<f64>, JsError> {
    density(mu1, mu2, sigma1, sigma2, rho, kind, nu, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = equivalenceReport)]
#[allow(clippy::too_many_arguments)]
pub fn equivalence_js(
    mus: &[f64],
    sigmas: &[f64],
    rho: f64,
    kind: &str,
    nu: f64,
    target_vol: f64,
    n_candidates: usize,
    seed: u32,
    theta_min: f64,
    theta_max: f64,
    count: usize,
) -> Result<String, JsError> {
    equivalence(mus, sigmas, rho, kind, nu, target_vol, n_candidates, u64::from(seed), theta_min, theta_max, count)
        .map_err(|e| JsError::new(&e))
}

/// Scatter with scales `sigmas` and a common correlation `rho`.
pub fn covariance(sigmas: &[f64], rho: f64) -> Result<DMatrix<f64>, String> {
    let n = sigmas.len();
    if n > 1 && !(rho > -1.0 / (n - 1) as f64 && rho < 1.0) {
        return Err(format!("correlation {rho} is outside (-1/{}, 1)", n - 1));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| if i == j { sigmas[i] * sigmas[i] } else { rho * sigmas[i] * sigmas[j] }))
}
