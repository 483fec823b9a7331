//! Omega straight from its definition,
//!
//! ```text
//! Ω(θ) = ∫_θ^∞ [1 − F(r)] dr / ∫_{−∞}^θ F(r) dr,
//! ```
//!
//! with `F` itself obtained by integrating the density kernel. Nothing here
//! goes through `G`, the special-function CDFs, or integration by parts, so it
//! serves as an independent check of the closed forms.

use crate::elliptical::{Generator, UnivariateLaw};
use crate::error::{Error, Result};
use crate::omega::{existence_check, OmegaValue, Threshold};
use crate::quadrature::{self, Tolerance};

/// `1 − Ψ(x)` by quadrature of `C g(−u²/2)`.
fn survival_by_quadrature(generator: &Generator, x: f64) -> Result<f64> {
    let upper_tail = |from: f64| {
        quadrature::integrate_to_infinity(|u| generator.pdf(u), from, generator.pdf_decay(), Tolerance::default())
            .map(|e| e.value)
    };
    if x >= 0.0 {
        upper_tail(x)
    } else {
        Ok(1.0 - upper_tail(-x)?)
    }
}

/// The defining ratio, both integrals by adaptive quadrature with the
/// analytic tail remainder. A zero denominator gives `PlusInfinity`.
pub fn omega_quadrature(law: &UnivariateLaw, theta: Threshold) -> Result<OmegaValue> {
    let generator = law.generator();
    if !existence_check(generator).is_defined() {
        return Err(Error::Undefined { tail_index: generator.tail_index() });
    }
    let (mu, sigma, theta) = (law.mu(), law.sigma(), theta.value());
    let survival = |r: f64| survival_by_quadrature(generator, (r - mu) / sigma).unwrap_or(f64::NAN);
    let cdf = |r: f64| survival_by_quadrature(generator, (mu - r) / sigma).unwrap_or(f64::NAN);

    let decay = generator.survival_decay();
    let tol = Tolerance::default();
    let gains = quadrature::integrate_to_infinity(survival, theta, decay, tol)?.value;
    let losses = quadrature::integrate_from_neg_infinity(cdf, theta, decay, tol)?.value;
    if !(gains.is_finite() && losses.is_finite()) {
        return Err(Error::QuadratureFailure(format!("non-finite partial moments at θ = {theta}")));
    }
    Ok(OmegaValue::from_parts(gains, losses))
}
