use std::fmt;

use crate::elliptical::{Generator, UnivariateLaw};
use crate::error::Result;
use crate::quadrature::{self, Tolerance};

/// Whether both Omega integrals converge for a generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Existence {
    Defined { tail_index: f64 },
    Undefined { tail_index: f64 },
}

impl Existence {
    pub fn is_defined(self) -> bool {
        matches!(self, Existence::Defined { .. })
    }
}

impl fmt::Display for Existence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Existence::Defined { tail_index } => write!(f, "defined (tail index {tail_index:?} > 1)"),
            Existence::Undefined { tail_index } => write!(f, "undefined (tail index {tail_index:?} <= 1)"),
        }
    }
}

/// Tails dominated by `1/|r|^α` with `α > 1` (strict) make both integrals
/// finite; the rule is applied to the generator's tail index.
pub fn existence_check(generator: &Generator) -> Existence {
    let tail_index = generator.tail_index();
    if tail_index > 1.0 {
        Existence::Defined { tail_index }
    } else {
        Existence::Undefined { tail_index }
    }
}

/// `∫_θ^A [1 − F(r)] dr` for a finite upper limit `A`.
pub fn truncated_gain(law: &UnivariateLaw, theta: f64, upper: f64) -> Result<f64> {
    quadrature::integrate(|r| 1.0 - law.cdf(r), theta, upper, Tolerance::default()).map(|e| e.value)
}

/// `∫_θ^A [1 − F(r)] dr` for the standard Cauchy with `A = exp(ln_upper)`.
///
/// Beyond `r = 1` the integral is taken in `t = ln r`, where the integrand
/// `e^t (1 − F(e^t)) = atan(e^-t) e^t / π` stays bounded, so `A` may exceed the
/// floating-point range.
pub fn cauchy_truncated_gain(theta: f64, ln_upper: f64) -> Result<f64> {
    let pi = std::f64::consts::PI;
    let pivot = theta.max(1.0);
    let upper = ln_upper.exp();
    let head_end = if ln_upper < pivot.ln() { upper } else { pivot };
    let head = quadrature::integrate(|r| 0.5 - r.atan() / pi, theta, head_end, Tolerance::default())?.value;
    if ln_upper <= pivot.ln() {
        return Ok(head);
    }
    let log_part = quadrature::integrate(
        |t| {
            let x = (-t).exp();
            let ratio = if x < 1e-8 { 1.0 - x * x / 3.0 } else { x.atan() / x };
            ratio / pi
        },
        pivot.ln(),
        ln_upper,
        Tolerance::default(),
    )?
    .value;
    Ok(head + log_part)
}
