//! Closed forms in terms of the Sharpe level `S = (μ − θ)/σ`:
//!
//! ```text
//! Ω = 1 + 1 / (G(−S²/2)/S − Ψ(−S))
//! ```
//!
//! with `G(u) = ∫_{−∞}^u C g(x) dx`; for the normal generator `G(−S²/2) = ψ(S)`.
//! Both partial moments are `L(a) = ∫_{−∞}^a Ψ = aΨ(a) + G(−a²/2)`, so the
//! same value is evaluated as `L(S)/L(−S)`, which avoids the cancellation of
//! `1 + 1/(…)` when Ω is small. At `S = 0` the value is the limit 1.

use libm::erfc;

use crate::elliptical::{Generator, UnivariateLaw};
use crate::error::{Error, Result};
use crate::omega::{existence_check, OmegaValue, SharpeLevel, Threshold};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn normal_pdf(s: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * s * s).exp()
}

fn normal_cdf(s: f64) -> f64 {
    0.5 * erfc(-s / std::f64::consts::SQRT_2)
}

fn sharpe(law: &UnivariateLaw, theta: Threshold) -> f64 {
    (law.mu() - theta.value()) / law.sigma()
}

/// `Ω` from `S`, `G(−S²/2)`, `Ψ(S)` and `Ψ(−S)`.
fn omega_from_parts(s: f64, g: f64, cdf_s: f64, cdf_neg_s: f64) -> OmegaValue {
    if s == 0.0 {
        return OmegaValue::Finite(1.0);
    }
    let gains = s * cdf_s + g;
    let losses = g - s * cdf_neg_s;
    OmegaValue::from_parts(gains.max(0.0), losses.max(0.0))
}

fn require_defined(generator: &Generator) -> Result<()> {
    if existence_check(generator).is_defined() {
        Ok(())
    } else {
        Err(Error::Undefined { tail_index: generator.tail_index() })
    }
}

/// Omega of a normal law from the standard normal `ψ`, `Ψ`.
pub fn omega_normal_closed_form(law: &UnivariateLaw, theta: Threshold) -> Result<OmegaValue> {
    if !law.generator().is_normal() {
        return Err(Error::GeneratorMismatch("omega_normal_closed_form"));
    }
    let s = sharpe(law, theta);
    Ok(omega_from_parts(s, normal_pdf(s), normal_cdf(s), normal_cdf(-s)))
}

/// `G(u) = ∫_{−∞}^u C g(x) dx` for `u <= 0`.
pub fn g_integral(generator: &Generator, u: f64) -> Result<f64> {
    require_defined(generator)?;
    generator.g_integral(u)
}

/// Omega of an elliptical law, with `G` evaluated by quadrature of the kernel.
pub fn omega_elliptical_closed_form(law: &UnivariateLaw, theta: Threshold) -> Result<OmegaValue> {
    let generator = law.generator();
    require_defined(generator)?;
    let s = sharpe(law, theta);
    if s == 0.0 {
        return Ok(OmegaValue::Finite(1.0));
    }
    let g = generator.g_integral(-0.5 * s * s)?;
    Ok(omega_from_parts(s, g, generator.cdf(s), generator.cdf(-s)))
}

/// The normal form for normal laws, the elliptical form otherwise.
pub fn omega_closed_form(law: &UnivariateLaw, theta: Threshold) -> Result<OmegaValue> {
    if law.generator().is_normal() {
        omega_normal_closed_form(law, theta)
    } else {
        omega_elliptical_closed_form(law, theta)
    }
}

/// `∂Ω/∂S = G(−S²/2) / (S² (G(−S²/2)/S − Ψ(−S))²)`, positive for every `S ≠ 0`.
///
/// Evaluated as `G / (G − SΨ(−S))²`.
pub fn omega_slope(law: &UnivariateLaw, s: SharpeLevel) -> Result<f64> {
    let s = s.value();
    if s == 0.0 {
        return Err(Error::SingularAtZero);
    }
    let generator = law.generator();
    require_defined(generator)?;
    let (g, cdf_neg_s) = if generator.is_normal() {
        (normal_pdf(s), normal_cdf(-s))
    } else {
        (generator.g_integral(-0.5 * s * s)?, generator.cdf(-s))
    };
    let losses = g - s * cdf_neg_s;
    Ok(g / (losses * losses))
}
