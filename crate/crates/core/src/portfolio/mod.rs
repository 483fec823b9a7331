//! Portfolios of elliptical assets: projection to a univariate law, Sharpe and
//! Omega optimization over a finite candidate set, and the ranking comparison
//! on a fixed-volatility slice.
//!
//! Linear combinations of an elliptical vector are elliptical with the same
//! generator, so every candidate maps to `(wᵀμ, √(wᵀΣw), g)`. At fixed scale
//! Omega is a strictly increasing function of the Sharpe level, which makes
//! both optimizers pick the same candidate.

mod candidates;
mod optimize;
mod report;

use crate::elliptical::{EllipticalModel, Generator, UnivariateLaw};
use crate::error::{Error, Result};
use crate::omega::{SharpeLevel, Threshold};

pub use candidates::{random_candidates, CandidateSet};
pub use optimize::{optimize_omega, optimize_sharpe, Selection};
pub use report::{
    equivalence_report, equivalence_report_unconstrained, lognormal_equivalence_report, RankingReport, ReportMode,
    ThetaRanking,
};

/// Budget tolerance `|Σw − 1|`.
pub const BUDGET_TOL: f64 = 1e-12;
/// Relative width of the volatility slice `|σ(w) − σ_target| <= tol · σ_target`.
pub const SLICE_TOL: f64 = 1e-9;
/// Relative size below which `wᵀΣw` counts as zero.
const SCALE_TOL: f64 = 1e-14;

/// Which weight vectors are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintSet {
    /// `Σw = 1`.
    pub budget: bool,
    /// `w ≥ 0`.
    pub long_only: bool,
}

impl Default for ConstraintSet {
    fn default() -> Self {
        Self { budget: true, long_only: false }
    }
}

impl ConstraintSet {
    pub fn long_only() -> Self {
        Self { budget: true, long_only: true }
    }

    pub fn unconstrained() -> Self {
        Self { budget: false, long_only: false }
    }

    pub fn check(&self, weights: &[f64]) -> Result<()> {
        if self.budget {
            let total: f64 = weights.iter().sum();
            if (total - 1.0).abs() > BUDGET_TOL {
                return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
            }
        }
        if self.long_only {
            if let Some(i) = weights.iter().position(|w| *w < 0.0) {
                return Err(Error::InvalidArgument(format!("weight {i} is negative under long-only")));
            }
        }
        Ok(())
    }
}

/// Labelled weight vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioSpec {
    pub label: String,
    weights: Vec<f64>,
}

impl PortfolioSpec {
    pub fn new(label: impl Into<String>, weights: Vec<f64>, constraints: &ConstraintSet) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        if let Some(i) = weights.iter().position(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument(format!("weight {i} is not finite")));
        }
        constraints.check(&weights)?;
        Ok(Self { label: label.into(), weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Required portfolio scale `σ_target > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TargetVolatility(f64);

impl TargetVolatility {
    pub fn new(sigma_target: f64) -> Result<Self> {
        if !(sigma_target > 0.0 && sigma_target.is_finite()) {
            return Err(Error::InvalidArgument(format!("target volatility must be positive, got {sigma_target}")));
        }
        Ok(Self(sigma_target))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Whether a portfolio scale lies on the slice.
    pub fn admits(self, sigma: f64) -> bool {
        (sigma - self.0).abs() <= SLICE_TOL * self.0
    }
}

/// Sum of the terms in ascending order; equal multisets give equal sums.
pub(crate) fn ordered_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// `(wᵀμ, wᵀΣw)` with order-independent summation.
pub(crate) fn moments(model: &EllipticalModel, weights: &[f64]) -> Result<(f64, f64)> {
    let n = model.dim();
    if weights.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: weights.len() });
    }
    let mu = model.mu();
    let sigma = model.sigma();
    let mean = ordered_sum(weights.iter().zip(mu.iter()).map(|(w, m)| w * m).collect());
    let mut products = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            products.push(weights[i] * sigma[(i, j)] * weights[j]);
        }
    }
    Ok((mean, ordered_sum(products)))
}

/// Law of `wᵀX`: `(wᵀμ, √(wᵀΣw), g)`, with `g` the one-dimensional marginal of
/// the model's generator.
pub fn project(model: &EllipticalModel, portfolio: &PortfolioSpec) -> Result<UnivariateLaw> {
    let generator = model.generator().marginal(model.rank())?;
    project_with(model, &generator, portfolio.weights())
}

/// [`project`] with the marginal generator already built.
pub(crate) fn project_with(model: &EllipticalModel, marginal: &Generator, weights: &[f64]) -> Result<UnivariateLaw> {
    let (mean, variance) = moments(model, weights)?;
    let size: f64 = weights.iter().map(|w| w * w).sum::<f64>() * model.sigma().amax();
    if !(variance > SCALE_TOL * size) {
        return Err(Error::DegenerateScale(variance));
    }
    UnivariateLaw::new(mean, variance.sqrt(), marginal.clone())
}

/// `S = (μ − θ) / σ`.
pub fn sharpe_ratio(law: &UnivariateLaw, theta: Threshold) -> SharpeLevel {
    SharpeLevel::from_finite((law.mu() - theta.value()) / law.sigma())
}
