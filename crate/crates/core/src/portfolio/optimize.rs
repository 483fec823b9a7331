use crate::elliptical::{EllipticalModel, Generator};
use crate::error::{Error, Result};
use crate::omega::{existence_check, omega_closed_form, OmegaValue, Threshold};
use crate::portfolio::{moments, project_with, PortfolioSpec, TargetVolatility};

/// Winning candidate and its score.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    pub portfolio: PortfolioSpec,
    pub score: f64,
}

/// Index of the largest score; the lowest index wins ties.
pub(crate) fn argmax(scores: &[(usize, f64)]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for &(i, s) in scores {
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((i, s)),
        }
    }
    best
}

/// Indices and means of the candidates on the volatility slice.
pub(crate) fn feasible(
    model: &EllipticalModel,
    candidates: &[PortfolioSpec],
    vol: TargetVolatility,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let (mean, variance) = moments(model, c.weights())?;
        if variance > 0.0 && vol.admits(variance.sqrt()) {
            out.push((i, mean));
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyFeasibleSet(vol.value()));
    }
    Ok(out)
}

pub(crate) fn defined_marginal(model: &EllipticalModel) -> Result<Generator> {
    let marginal = model.generator().marginal(model.rank())?;
    if !existence_check(&marginal).is_defined() {
        return Err(Error::Undefined { tail_index: marginal.tail_index() });
    }
    Ok(marginal)
}

/// Omega of every listed candidate at `theta`, in input order.
pub(crate) fn omega_scores(
    model: &EllipticalModel,
    marginal: &Generator,
    candidates: &[PortfolioSpec],
    indices: &[usize],
    theta: Threshold,
) -> Result<Vec<OmegaValue>> {
    let eval = |i: &usize| {
        let law = project_with(model, marginal, candidates[*i].weights())?;
        omega_closed_form(&law, theta)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        indices.par_iter().map(eval).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        indices.iter().map(eval).collect()
    }
}

fn select(candidates: &[PortfolioSpec], scores: &[(usize, f64)]) -> Selection {
    let (index, score) = argmax(scores).expect("feasible set is non-empty");
    Selection { index, portfolio: candidates[index].clone(), score }
}

/// Candidate maximizing `(wᵀμ − θ) / σ_target` on the volatility slice.
pub fn optimize_sharpe(
    model: &EllipticalModel,
    candidates: &[PortfolioSpec],
    theta: Threshold,
    vol: TargetVolatility,
) -> Result<Selection> {
    let scores: Vec<(usize, f64)> = feasible(model, candidates, vol)?
        .into_iter()
        .map(|(i, mean)| (i, (mean - theta.value()) / vol.value()))
        .collect();
    Ok(select(candidates, &scores))
}

/// Candidate maximizing the closed-form Omega of its projected law on the
/// volatility slice.
pub fn optimize_omega(
    model: &EllipticalModel,
    candidates: &[PortfolioSpec],
    theta: Threshold,
    vol: TargetVolatility,
) -> Result<Selection> {
    let marginal = defined_marginal(model)?;
    let indices: Vec<usize> = feasible(model, candidates, vol)?.into_iter().map(|(i, _)| i).collect();
    let omegas = omega_scores(model, &marginal, candidates, &indices, theta)?;
    let scores: Vec<(usize, f64)> = indices.iter().zip(&omegas).map(|(i, o)| (*i, o.as_f64())).collect();
    Ok(select(candidates, &scores))
}
