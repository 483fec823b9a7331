//! Omega ratio: the defining integrals by quadrature, the empirical estimator,
//! closed forms for normal and elliptical laws, existence and monotonicity.

mod closed_form;
mod curve;
mod empirical;
mod existence;
mod oracle;

use std::fmt;

use crate::error::{Error, Result};
use crate::format::shortest;

pub use closed_form::{
    g_integral, omega_closed_form, omega_elliptical_closed_form, omega_normal_closed_form, omega_slope,
};
pub use curve::{default_theta_grid, empirical_curve, omega_curve, CurveColumn, OmegaCurve, DEFAULT_CURVE_POINTS};
pub use empirical::{gain_loss_ratio, omega_empirical};
pub use existence::{cauchy_truncated_gain, existence_check, truncated_gain, Existence};
pub use oracle::omega_quadrature;

/// Return level separating gains from losses.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Threshold(f64);

impl Threshold {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::InvalidArgument(format!("threshold must be finite, got {theta}")));
        }
        Ok(Self(theta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `S = (μ − θ) / σ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SharpeLevel(f64);

impl SharpeLevel {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() {
            return Err(Error::InvalidArgument(format!("Sharpe level must be finite, got {s}")));
        }
        Ok(Self(s))
    }

    pub(crate) fn from_finite(s: f64) -> Self {
        debug_assert!(!s.is_nan());
        Self(s)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Value of an Omega ratio. Gains with no losses are `PlusInfinity`; a ratio
/// with neither gains nor losses is `Undefined`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaValue {
    Finite(f64),
    PlusInfinity,
    Undefined,
}

impl OmegaValue {
    pub(crate) fn from_parts(gains: f64, losses: f64) -> Self {
        if losses > 0.0 {
            OmegaValue::Finite(gains / losses)
        } else if gains > 0.0 {
            OmegaValue::PlusInfinity
        } else {
            OmegaValue::Undefined
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            OmegaValue::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `+∞` for `PlusInfinity`, NaN for `Undefined`.
    pub fn as_f64(self) -> f64 {
        match self {
            OmegaValue::Finite(v) => v,
            OmegaValue::PlusInfinity => f64::INFINITY,
            OmegaValue::Undefined => f64::NAN,
        }
    }

    /// CSV cell, optionally as `log₁₀ Ω`.
    pub fn to_cell(self, log10: bool) -> String {
        match self {
            OmegaValue::Finite(v) if log10 => shortest(v.log10()),
            OmegaValue::Finite(v) => shortest(v),
            OmegaValue::PlusInfinity => "inf".to_string(),
            OmegaValue::Undefined => "undef".to_string(),
        }
    }
}

impl fmt::Display for OmegaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cell(false))
    }
}

/// Realized per-period returns.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub label: Option<String>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(label: Option<String>, returns: Vec<f64>) -> Result<Self> {
        if returns.is_empty() {
            return Err(Error::InvalidArgument("return series is empty".into()));
        }
        if let Some(i) = returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::InvalidArgument(format!("return {i} is not finite")));
        }
        Ok(Self { label, returns })
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_value_cells() {
        assert_eq!(OmegaValue::Finite(100.0).to_cell(true), "2");
        assert_eq!(OmegaValue::Finite(0.0).to_cell(true), "-inf");
        assert_eq!(OmegaValue::PlusInfinity.to_cell(true), "inf");
        assert_eq!(OmegaValue::Undefined.to_cell(false), "undef");
    }

    #[test]
    fn from_parts_statuses() {
        assert_eq!(OmegaValue::from_parts(1.0, 0.0), OmegaValue::PlusInfinity);
        assert_eq!(OmegaValue::from_parts(0.0, 0.0), OmegaValue::Undefined);
        assert_eq!(OmegaValue::from_parts(0.0, 2.0), OmegaValue::Finite(0.0));
    }

    #[test]
    fn series_validation() {
        assert!(ReturnSeries::new(None, vec![]).is_err());
        assert!(ReturnSeries::new(None, vec![0.1, f64::NAN]).is_err());
        assert!(Threshold::new(f64::INFINITY).is_err());
    }
}
