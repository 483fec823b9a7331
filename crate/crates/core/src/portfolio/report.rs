use std::cmp::Ordering;
use std::io::{self, Write};

use crate::elliptical::{sample, AxisRange, EllipticalModel};
use crate::error::Result;
use crate::format::shortest;
use crate::omega::{omega_empirical, OmegaValue, ReturnSeries, Threshold};
use crate::portfolio::optimize::{defined_marginal, feasible, omega_scores};
use crate::portfolio::{moments, PortfolioSpec, TargetVolatility};
use crate::stats;

/// Hypotheses under which a report was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportMode {
    /// Candidates restricted to the volatility slice of an elliptical model.
    FixedVolatility,
    /// Each candidate keeps its own volatility.
    ConstraintOff,
    /// Empirical Omega and sample Sharpe on skewed (lognormal) draws.
    EmpiricalLognormal,
}

impl ReportMode {
    pub fn name(self) -> &'static str {
        match self {
            ReportMode::FixedVolatility => "fixed-volatility",
            ReportMode::ConstraintOff => "constraint-off",
            ReportMode::EmpiricalLognormal => "empirical-lognormal",
        }
    }
}

/// Scores and ranks at one threshold. Vectors are aligned with
/// [`RankingReport::candidates`]; ranks are 1-based with 1 the best.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaRanking {
    pub theta: f64,
    pub argmax_omega: usize,
    pub argmax_sharpe: usize,
    pub omega: Vec<OmegaValue>,
    pub sharpe: Vec<f64>,
    pub rank_omega: Vec<usize>,
    pub rank_sharpe: Vec<usize>,
}

impl ThetaRanking {
    pub fn agree(&self) -> bool {
        self.argmax_omega == self.argmax_sharpe
    }

    pub fn rankings_agree(&self) -> bool {
        self.rank_omega == self.rank_sharpe
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub mode: ReportMode,
    /// Indices into the caller's candidate list that were evaluated.
    pub candidates: Vec<usize>,
    pub rows: Vec<ThetaRanking>,
    /// Argmax by Omega equals argmax by Sharpe at every θ.
    pub agree: bool,
    /// Full rank orders coincide at every θ.
    pub rankings_agree: bool,
    /// The Omega rank order is the same at every θ.
    pub omega_ranking_theta_invariant: bool,
}

impl RankingReport {
    fn assemble(mode: ReportMode, candidates: Vec<usize>, rows: Vec<ThetaRanking>) -> Self {
        let agree = rows.iter().all(ThetaRanking::agree);
        let rankings_agree = rows.iter().all(ThetaRanking::rankings_agree);
        let omega_ranking_theta_invariant = rows.windows(2).all(|w| w[0].rank_omega == w[1].rank_omega);
        Self { mode, candidates, rows, agree, rankings_agree, omega_ranking_theta_invariant }
    }

    /// Thresholds at which the two argmaxes differ.
    pub fn disagreements(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| !r.agree()).map(|r| r.theta).collect()
    }

    /// `theta,argmax_omega,argmax_sharpe,agree`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta,argmax_omega,argmax_sharpe,agree")?;
        for row in &self.rows {
            writeln!(out, "{},{},{},{}", shortest(row.theta), row.argmax_omega, row.argmax_sharpe, row.agree())?;
        }
        Ok(())
    }

    /// `theta,candidate,omega,sharpe,rank_omega,rank_sharpe`.
    pub fn write_long_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "theta,candidate,omega,sharpe,rank_omega,rank_sharpe")?;
        for row in &self.rows {
            for (k, candidate) in self.candidates.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    shortest(row.theta),
                    candidate,
                    row.omega[k],
                    shortest(row.sharpe[k]),
                    row.rank_omega[k],
                    row.rank_sharpe[k]
                )?;
            }
        }
        Ok(())
    }
}

/// Descending order with NaN last; the earlier position wins ties.
fn descending(a: f64, b: f64) -> Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => b.partial_cmp(&a).expect("non-NaN"),
    }
}

fn ranks(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    // stable sort keeps the lower position first among equals
    order.sort_by(|&i, &j| descending(scores[i], scores[j]));
    let mut rank = vec![0; scores.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    rank
}

fn ranking_row(theta: f64, candidates: &[usize], omega: Vec<OmegaValue>, sharpe: Vec<f64>) -> ThetaRanking {
    let omega_scores: Vec<f64> = omega.iter().map(|o| o.as_f64()).collect();
    let rank_omega = ranks(&omega_scores);
    let rank_sharpe = ranks(&sharpe);
    let top = |rank: &[usize]| candidates[rank.iter().position(|&r| r == 1).expect("non-empty")];
    ThetaRanking {
        theta,
        argmax_omega: top(&rank_omega),
        argmax_sharpe: top(&rank_sharpe),
        omega,
        sharpe,
        rank_omega,
        rank_sharpe,
    }
}

/// Both optimizers at every θ of `grid`, on the volatility slice.
pub fn equivalence_report(
    model: &EllipticalModel,
    candidates: &[PortfolioSpec],
    grid: &AxisRange,
    vol: TargetVolatility,
) -> Result<RankingReport> {
    let marginal = defined_marginal(model)?;
    let slice = feasible(model, candidates, vol)?;
    let indices: Vec<usize> = slice.iter().map(|(i, _)| *i).collect();
    let mut rows = Vec::with_capacity(grid.count);
    for theta in grid.points() {
        let omega = omega_scores(model, &marginal, candidates, &indices, Threshold::new(theta)?)?;
        let sharpe = slice.iter().map(|(_, mean)| (mean - theta) / vol.value()).collect();
        rows.push(ranking_row(theta, &indices, omega, sharpe));
    }
    Ok(RankingReport::assemble(ReportMode::FixedVolatility, indices, rows))
}

/// As [`equivalence_report`] with no volatility constraint: each candidate's
/// Sharpe level uses its own scale.
pub fn equivalence_report_unconstrained(
    model: &EllipticalModel,
    candidates: &[PortfolioSpec],
    grid: &AxisRange,
) -> Result<RankingReport> {
    let marginal = defined_marginal(model)?;
    let indices: Vec<usize> = (0..candidates.len()).collect();
    let stats = candidates
        .iter()
        .map(|c| moments(model, c.weights()).map(|(m, v)| (m, v.sqrt())))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(grid.count);
    for theta in grid.points() {
        let omega = omega_scores(model, &marginal, candidates, &indices, Threshold::new(theta)?)?;
        let sharpe = stats.iter().map(|(mean, sd)| (mean - theta) / sd).collect();
        rows.push(ranking_row(theta, &indices, omega, sharpe));
    }
    Ok(RankingReport::assemble(ReportMode::ConstraintOff, indices, rows))
}

/// Comparison outside the elliptical hypothesis. Each asset's gross return is
/// `exp(Xᵢ)` for `X` drawn from `model`; a candidate earns `Σ wᵢ (exp(Xᵢ) − 1)`.
/// Omega is the empirical estimator and Sharpe uses the sample mean and
/// standard deviation.
pub fn lognormal_equivalence_report(
    model: &EllipticalModel,
    candidates: &[PortfolioSpec],
    grid: &AxisRange,
    n_draws: usize,
    seed: u64,
) -> Result<RankingReport> {
    let batch = sample(model, n_draws, seed)?;
    let simple: Vec<f64> = batch.draws.iter().map(|x| x.exp_m1()).collect();
    let dim = batch.dim;
    let series = candidates
        .iter()
        .map(|c| {
            let returns =
                simple.chunks_exact(dim).map(|x| x.iter().zip(c.weights()).map(|(a, w)| a * w).sum()).collect();
            ReturnSeries::new(Some(c.label.clone()), returns)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary: Vec<(f64, f64)> =
        series.iter().map(|s| (stats::mean(s.returns()), stats::std_dev(s.returns()))).collect();
    let indices: Vec<usize> = (0..candidates.len()).collect();
    let mut rows = Vec::with_capacity(grid.count);
    for theta in grid.points() {
        let t = Threshold::new(theta)?;
        let omega = series.iter().map(|s| omega_empirical(s, t)).collect();
        let sharpe = summary.iter().map(|(mean, sd)| (mean - theta) / sd).collect();
        rows.push(ranking_row(theta, &indices, omega, sharpe));
    }
    Ok(RankingReport::assemble(ReportMode::EmpiricalLognormal, indices, rows))
}
