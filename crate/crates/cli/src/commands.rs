//! Subcommand execution. Results are rendered to memory first and then
//! written in one step, so a failed run never leaves a partial file.

use std::io::Write;
use std::path::{Path, PathBuf};

use omega_core::elliptical::{sample, AxisRange};
use omega_core::format::shortest;
use omega_core::omega::{
    default_theta_grid, empirical_curve, existence_check, gain_loss_ratio, omega_closed_form, omega_curve,
    omega_empirical, Existence, DEFAULT_CURVE_POINTS,
};
use omega_core::portfolio::{
    equivalence_report, equivalence_report_unconstrained, lognormal_equivalence_report, optimize_omega,
    optimize_sharpe, random_candidates, sharpe_ratio, ConstraintSet, RankingReport, ReportMode, Selection,
};
use omega_core::{EllipticalModel, Error as CoreError, PortfolioSpec, TargetVolatility, Threshold, UnivariateLaw};

use crate::args::{Command, GridOptions, ModelSource, PortfolioOptions, RunConfig, Source};
use crate::error::{CliError, UsageError, EXIT_OK, EXIT_UNDEFINED};
use crate::input::{build_generator, build_model, load_model, load_returns};

/// Points of an axis or θ grid when only its bounds are implied.
const DEFAULT_AXIS_POINTS: usize = 101;
const DEFAULT_REPORT_POINTS: usize = 21;
/// Half-width of default axes in units of the scale.
const AXIS_HALF_WIDTH: f64 = 4.0;
/// Volatility slices, as multiples of `--target-vol`, for the constraint-off report.
const UNCONSTRAINED_SLICES: [f64; 3] = [1.0, 1.5, 2.0];

/// Runs a parsed command and returns the process exit status. Errors are
/// reported on stderr.
pub fn run(config: RunConfig) -> u8 {
    match execute(config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("omega: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(config: RunConfig) -> Result<u8, CliError> {
    let RunConfig { command, output } = config;
    let mut buf = Vec::new();
    let mut code = EXIT_OK;
    match command {
        Command::Omega { source, theta } => omega(&mut buf, source, theta)?,
        Command::Curve { source, grid, log } => curve(&mut buf, source, &grid, log)?,
        Command::Sample { model, n_samples, seed } => {
            let model = model_from(model)?;
            let batch = sample(&model, n_samples, seed)?;
            let header: Vec<String> = (1..=batch.dim).map(|i| format!("x{i}")).chain(["radius".into()]).collect();
            writeln!(buf, "{}", header.join(","))?;
            for (row, radius) in batch.rows().zip(&batch.radii) {
                let cells: Vec<String> = row.iter().chain([radius]).map(|v| shortest(*v)).collect();
                writeln!(buf, "{}", cells.join(","))?;
            }
        }
        Command::DensityGrid { model, x, y } => {
            let model = model_from(model)?;
            if model.dim() != 2 {
                return Err(UsageError::flag(
                    "--mu",
                    format!("density-grid needs a 2-asset model, got {}", model.dim()),
                )
                .into());
            }
            let x = x.map_or_else(|| default_axis(&model, 0), Ok)?;
            let y = y.map_or_else(|| default_axis(&model, 1), Ok)?;
            model.density_grid(&x, &y)?.write_csv(&mut buf)?;
        }
        Command::Optimize { model, portfolio, theta } => optimize(&mut buf, model, &portfolio, theta)?,
        Command::CheckExistence { generator } => {
            let existence = existence_check(&build_generator(generator)?);
            writeln!(buf, "{existence}")?;
            if let Existence::Undefined { .. } = existence {
                code = EXIT_UNDEFINED;
            }
        }
        Command::Equivalence { model, portfolio, grid, mode, n_samples, long_output } => {
            let report = equivalence(model, &portfolio, &grid, mode, n_samples)?;
            report.write_csv(&mut buf)?;
            let long_path = long_output.or_else(|| output.as_deref().map(default_long_path));
            if let Some(path) = long_path {
                let mut long = Vec::new();
                report.write_long_csv(&mut long)?;
                emit(Some(&path), &long)?;
            }
            eprintln!("{}", summary(&report));
        }
    }
    emit(output.as_deref(), &buf)?;
    Ok(code)
}

/// `<stem>.long.csv` beside the main output.
pub fn default_long_path(output: &Path) -> PathBuf {
    let stem = output.file_stem().map_or_else(|| "report".into(), |s| s.to_string_lossy().into_owned());
    output.with_file_name(format!("{stem}.long.csv"))
}

/// Writes to `path` through a temporary file in the same directory, or to stdout.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.as_file().sync_all()?;
            tmp.persist(path).map_err(|e| e.error)?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn model_from(source: ModelSource) -> Result<EllipticalModel, CliError> {
    match source {
        ModelSource::Inline { mu, cov, generator } => build_model(mu, &cov, generator),
        ModelSource::File { path, generator } => load_model(&path, generator),
    }
}

fn laws(
    mu: &[f64],
    sigma: &[f64],
    labels: &[String],
    generator: crate::args::GeneratorSpec,
) -> Result<Vec<(String, UnivariateLaw)>, CliError> {
    let generator = build_generator(generator)?;
    mu.iter()
        .zip(sigma)
        .zip(labels)
        .map(|((m, s), label)| Ok((label.clone(), UnivariateLaw::new(*m, *s, generator.clone())?)))
        .collect()
}

fn require_defined(law: &UnivariateLaw) -> Result<(), CliError> {
    match existence_check(law.generator()) {
        Existence::Defined { .. } => Ok(()),
        Existence::Undefined { tail_index } => Err(CoreError::Undefined { tail_index }.into()),
    }
}

fn omega(buf: &mut Vec<u8>, source: Source, theta: f64) -> Result<(), CliError> {
    let t = Threshold::new(theta)?;
    match source {
        Source::Laws { mu, sigma, labels, generator } => {
            writeln!(buf, "label,mu,sigma,theta,sharpe,omega")?;
            for (label, law) in laws(&mu, &sigma, &labels, generator)? {
                require_defined(&law)?;
                let value = omega_closed_form(&law, t)?;
                writeln!(
                    buf,
                    "{label},{},{},{},{},{}",
                    shortest(law.mu()),
                    shortest(law.sigma()),
                    shortest(theta),
                    shortest(sharpe_ratio(&law, t).value()),
                    value.to_cell(false)
                )?;
            }
        }
        Source::Returns(path) => {
            writeln!(buf, "label,n,theta,omega,gain_loss_ratio")?;
            for series in load_returns(&path)? {
                writeln!(
                    buf,
                    "{},{},{},{},{}",
                    series.label.as_deref().unwrap_or(""),
                    series.len(),
                    shortest(theta),
                    omega_empirical(&series, t).to_cell(false),
                    gain_loss_ratio(&series).to_cell(false)
                )?;
            }
        }
    }
    Ok(())
}

/// Explicit bounds, or `None` to let the caller pick them.
fn explicit_grid(grid: &GridOptions, default_count: usize) -> Result<Option<AxisRange>, CliError> {
    let count = grid.count.unwrap_or(default_count);
    match (grid.min, grid.max) {
        (Some(lo), Some(hi)) => Ok(Some(AxisRange::new(lo, hi, count)?)),
        (Some(_), None) => Err(UsageError::flag("--theta-max", "required with --theta-min").into()),
        (None, Some(_)) => Err(UsageError::flag("--theta-min", "required with --theta-max").into()),
        (None, None) => Ok(None),
    }
}

fn curve(buf: &mut Vec<u8>, source: Source, grid: &GridOptions, log: bool) -> Result<(), CliError> {
    let curve = match source {
        Source::Laws { mu, sigma, labels, generator } => {
            let laws = laws(&mu, &sigma, &labels, generator)?;
            for (_, law) in &laws {
                require_defined(law)?;
            }
            let axis = match explicit_grid(grid, DEFAULT_CURVE_POINTS)? {
                Some(axis) => axis,
                None => {
                    let plain: Vec<UnivariateLaw> = laws.iter().map(|(_, l)| l.clone()).collect();
                    default_theta_grid(&plain, grid.count)?
                }
            };
            omega_curve(&laws, &axis)?
        }
        Source::Returns(path) => {
            let series = load_returns(&path)?;
            let axis = match explicit_grid(grid, DEFAULT_CURVE_POINTS)? {
                Some(axis) => axis,
                None => {
                    let all = series.iter().flat_map(|s| s.returns().iter().copied());
                    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
                    let count = grid.count.unwrap_or(DEFAULT_CURVE_POINTS);
                    if hi > lo {
                        AxisRange::new(lo, hi, count)?
                    } else {
                        AxisRange::new(lo, lo, 1)?
                    }
                }
            };
            empirical_curve(&series, &axis)?
        }
    };
    curve.write_csv(buf, log)?;
    Ok(())
}

fn default_axis(model: &EllipticalModel, i: usize) -> Result<AxisRange, CliError> {
    let centre = model.mu()[i];
    let half = AXIS_HALF_WIDTH * model.sigma()[(i, i)].sqrt();
    if !(half > 0.0) {
        return Err(UsageError::flag("--cov", format!("asset {} has zero scale; give an explicit range", i + 1)).into());
    }
    Ok(AxisRange::new(centre - half, centre + half, DEFAULT_AXIS_POINTS)?)
}

fn constraints(options: &PortfolioOptions) -> ConstraintSet {
    if options.long_only {
        ConstraintSet::long_only()
    } else {
        ConstraintSet::default()
    }
}

fn candidates(model: &EllipticalModel, options: &PortfolioOptions) -> Result<Vec<PortfolioSpec>, CliError> {
    let vol = TargetVolatility::new(options.target_vol)?;
    let set = random_candidates(model.dim(), options.n_candidates, vol, model, options.seed, &constraints(options))?;
    if set.discarded > 0 {
        eprintln!("omega: discarded {} draws off the feasible set", set.discarded);
    }
    Ok(set.candidates)
}

fn selection_row(buf: &mut Vec<u8>, objective: &str, theta: f64, s: &Selection) -> std::io::Result<()> {
    let weights: Vec<String> = s.portfolio.weights().iter().map(|w| shortest(*w)).collect();
    writeln!(
        buf,
        "{objective},{},{},{},{},{}",
        shortest(theta),
        s.index,
        s.portfolio.label,
        shortest(s.score),
        weights.join(",")
    )
}

fn optimize(buf: &mut Vec<u8>, model: ModelSource, options: &PortfolioOptions, theta: f64) -> Result<(), CliError> {
    let model = model_from(model)?;
    let candidates = candidates(&model, options)?;
    let vol = TargetVolatility::new(options.target_vol)?;
    let t = Threshold::new(theta)?;
    let sharpe = optimize_sharpe(&model, &candidates, t, vol)?;
    let omega = optimize_omega(&model, &candidates, t, vol)?;
    let header: Vec<String> = ["objective", "theta", "candidate", "label", "score"]
        .iter()
        .map(|s| s.to_string())
        .chain((1..=model.dim()).map(|i| format!("w{i}")))
        .collect();
    writeln!(buf, "{}", header.join(","))?;
    selection_row(buf, "sharpe", theta, &sharpe)?;
    selection_row(buf, "omega", theta, &omega)?;
    Ok(())
}

fn equivalence(
    model: ModelSource,
    options: &PortfolioOptions,
    grid: &GridOptions,
    mode: ReportMode,
    n_samples: usize,
) -> Result<RankingReport, CliError> {
    let model = model_from(model)?;
    let candidates = match mode {
        ReportMode::ConstraintOff => spread_candidates(&model, options)?,
        _ => candidates(&model, options)?,
    };
    let axis = match explicit_grid(grid, DEFAULT_REPORT_POINTS)? {
        Some(axis) => axis,
        None => {
            // thresholds spanning the candidates' means by one target volatility
            let means: Vec<f64> = candidates
                .iter()
                .map(|c| c.weights().iter().zip(model.mu().iter()).map(|(w, m)| w * m).sum())
                .collect();
            let lo = means.iter().copied().fold(f64::INFINITY, f64::min) - options.target_vol;
            let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max) + options.target_vol;
            AxisRange::new(lo, hi, grid.count.unwrap_or(DEFAULT_REPORT_POINTS))?
        }
    };
    Ok(match mode {
        ReportMode::FixedVolatility => {
            equivalence_report(&model, &candidates, &axis, TargetVolatility::new(options.target_vol)?)?
        }
        ReportMode::ConstraintOff => equivalence_report_unconstrained(&model, &candidates, &axis)?,
        ReportMode::EmpiricalLognormal => {
            lognormal_equivalence_report(&model, &candidates, &axis, n_samples, options.seed)?
        }
    })
}

/// Candidates split over several volatility slices so that their scales differ.
fn spread_candidates(model: &EllipticalModel, options: &PortfolioOptions) -> Result<Vec<PortfolioSpec>, CliError> {
    let slices = UNCONSTRAINED_SLICES.len();
    let mut out = Vec::with_capacity(options.n_candidates);
    for (k, factor) in UNCONSTRAINED_SLICES.iter().enumerate() {
        let share = options.n_candidates / slices + usize::from(k < options.n_candidates % slices);
        if share == 0 {
            continue;
        }
        let slice = PortfolioOptions {
            n_candidates: share,
            target_vol: options.target_vol * factor,
            seed: options.seed.wrapping_add(k as u64),
            ..options.clone()
        };
        for c in candidates(model, &slice)? {
            let label = format!("w{}", out.len());
            out.push(PortfolioSpec::new(label, c.weights().to_vec(), &constraints(options))?);
        }
    }
    Ok(out)
}

fn summary(report: &RankingReport) -> String {
    let rows = report.rows.len();
    let disagreements = report.disagreements();
    let argmax = if disagreements.is_empty() {
        format!("argmax agrees at all {rows} thresholds")
    } else {
        let list: Vec<String> = disagreements.iter().map(|t| shortest(*t)).collect();
        format!("argmax differs at {} of {rows} thresholds ({})", disagreements.len(), list.join(", "))
    };
    format!(
        "{}: {argmax}; full rankings agree: {}; omega ranking theta-invariant: {}",
        report.mode.name(),
        report.rankings_agree,
        report.omega_ranking_theta_invariant
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn long_path_beside_output() {
        assert_eq!(default_long_path(Path::new("out/report.csv")), PathBuf::from("out/report.long.csv"));
        assert_eq!(default_long_path(Path::new("r")), PathBuf::from("r.long.csv"));
    }
}
