use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::elliptical::EllipticalModel;
use crate::error::{Error, Result};
use crate::portfolio::{moments, ConstraintSet, PortfolioSpec, TargetVolatility};

/// Draws attempted per requested candidate before giving up.
const ATTEMPTS_PER_CANDIDATE: usize = 50;

/// Candidates on the volatility slice and the number of draws discarded.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub candidates: Vec<PortfolioSpec>,
    pub discarded: usize,
    /// Minimum-variance portfolio the draws were rescaled around.
    pub min_variance: Vec<f64>,
}

/// Uniform draws on the simplex, each moved along the line through the
/// minimum-variance budget portfolio `w_mv = Σ⁺1 / 1ᵀΣ⁺1` until
/// `√(wᵀΣw) = σ_target`.
///
/// Draws whose line has no positive crossing, or that leave the long-only
/// region when `constraints.long_only` is set, are discarded.
pub fn random_candidates(
    n_assets: usize,
    n_candidates: usize,
    vol: TargetVolatility,
    model: &EllipticalModel,
    seed: u64,
    constraints: &ConstraintSet,
) -> Result<CandidateSet> {
    if n_assets < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 assets, got {n_assets}")));
    }
    if model.dim() != n_assets {
        return Err(Error::DimensionMismatch { expected: model.dim(), got: n_assets });
    }
    if n_candidates == 0 {
        return Err(Error::InvalidArgument("n_candidates must be at least 1".into()));
    }
    let constraints = ConstraintSet { budget: true, ..*constraints };

    let ones = DVector::from_element(n_assets, 1.0);
    let pinv_ones = model.pseudo_inverse() * &ones;
    let denom = ones.dot(&pinv_ones);
    if !(denom > 0.0) {
        return Err(Error::InfeasibleTarget("no budget portfolio has minimum variance".into()));
    }
    let w_mv: Vec<f64> = (pinv_ones / denom).iter().copied().collect();
    let (_, var_mv) = moments(model, &w_mv)?;
    let target_var = vol.value() * vol.value();
    if target_var < var_mv {
        return Err(Error::InfeasibleTarget(format!(
            "σ_target = {} is below the minimum volatility {}",
            vol.value(),
            var_mv.max(0.0).sqrt()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = Vec::with_capacity(n_candidates);
    let mut discarded = 0;
    for _ in 0..n_candidates * ATTEMPTS_PER_CANDIDATE {
        if candidates.len() == n_candidates {
            break;
        }
        let mut draw: Vec<f64> = (0..n_assets).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = draw.iter().sum();
        draw.iter_mut().for_each(|d| *d /= total);

        match rescale(model, &w_mv, &draw, target_var) {
            Some(w) if constraints.check(&w).is_ok() => {
                let label = format!("w{}", candidates.len());
                candidates.push(PortfolioSpec::new(label, w, &constraints)?);
            }
            _ => discarded += 1,
        }
    }
    if candidates.is_empty() {
        return Err(Error::InfeasibleTarget(format!(
            "all {discarded} draws were discarded for σ_target = {}",
            vol.value()
        )));
    }
    Ok(CandidateSet { candidates, discarded, min_variance: w_mv })
}

/// Point `w_mv + t (d − w_mv)`, `t > 0`, with variance `target_var`.
fn rescale(model: &EllipticalModel, w_mv: &[f64], draw: &[f64], target_var: f64) -> Option<Vec<f64>> {
    let n = w_mv.len();
    let dir: Vec<f64> = draw.iter().zip(w_mv).map(|(d, m)| d - m).collect();
    let sigma = model.sigma();
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            a += dir[i] * sigma[(i, j)] * dir[j];
            b += 2.0 * dir[i] * sigma[(i, j)] * w_mv[j];
        }
    }
    let (_, var_mv) = moments(model, w_mv).ok()?;
    let c = var_mv - target_var;
    if !(a > 1e-14 * target_var) {
        return None;
    }
    // c <= 0, so the larger root is non-negative
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let t = if b >= 0.0 { -2.0 * c / (b + disc.sqrt()) } else { (disc.sqrt() - b) / (2.0 * a) };
    if !(t > 0.0 && t.is_finite()) {
        return None;
    }
    let mut w: Vec<f64> = w_mv.iter().zip(&dir).map(|(m, d)| m + t * d).collect();
    // restore the budget to rounding
    let drift = (w.iter().sum::<f64>() - 1.0) / n as f64;
    w.iter_mut().for_each(|x| *x -= drift);
    let (_, var) = moments(model, &w).ok()?;
    TargetVolatility::new(target_var.sqrt()).ok()?.admits(var.sqrt()).then_some(w)
}
