//! Command-line and config-file parsing into a validated [`RunConfig`].
//!
//! Every option may also come from a TOML file given with `--config`; flags
//! win over the file. The seed falls back to `OMEGA_SEED`, then 0.

use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use omega_core::elliptical::AxisRange;
use omega_core::portfolio::ReportMode;

use crate::error::{CliError, ParseError, UsageError};

/// One value per flag occurrence; aliases keep clap from splitting them.
type List = Vec<f64>;
type Matrix = Vec<Vec<f64>>;

pub const SEED_ENV: &str = "OMEGA_SEED";
pub const DEFAULT_SAMPLES: usize = 10_000;
pub const DEFAULT_CANDIDATES: usize = 200;
pub const DEFAULT_REPORT_DRAWS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "omega", version, about = "Omega ratio analytics for normal and elliptical return laws")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Omega (and Sharpe) of univariate laws or return series at one threshold
    Omega(OmegaArgs),
    /// Omega as a function of the threshold, one column per law or series
    Curve(CurveArgs),
    /// Draws from a multivariate elliptical model
    Sample(SampleArgs),
    /// Bivariate density on a rectangular grid
    DensityGrid(DensityArgs),
    /// Best random candidate by Sharpe and by Omega on a volatility slice
    Optimize(OptimizeArgs),
    /// Whether Omega exists for a generator
    CheckExistence(ExistenceArgs),
    /// Argmax and ranking comparison of Omega and Sharpe over a threshold grid
    Equivalence(EquivalenceArgs),
}

#[derive(Debug, Args, Default)]
struct Common {
    /// TOML file supplying defaults for any flag
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when absent)
    #[arg(long, short, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct GeneratorArgs {
    /// normal, student_t or cauchy
    #[arg(long, value_name = "KIND")]
    generator: Option<String>,
    /// Degrees of freedom of student_t
    #[arg(long, value_parser = finite)]
    nu: Option<f64>,
}

#[derive(Debug, Args, Default)]
struct LawArgs {
    /// Location(s), comma separated
    #[arg(long, value_parser = list, allow_hyphen_values = true)]
    mu: Option<List>,
    /// Scale(s), comma separated
    #[arg(long, value_parser = list)]
    sigma: Option<List>,
    /// Column labels, comma separated
    #[arg(long, value_delimiter = ',')]
    labels: Option<Vec<String>>,
    /// Return CSV with header `date,<label>,...`
    #[arg(long, value_name = "FILE")]
    returns: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct ModelArgs {
    /// Location vector, comma separated
    #[arg(long, value_parser = list, allow_hyphen_values = true)]
    mu: Option<List>,
    /// Scales of independent assets (diagonal scatter), comma separated
    #[arg(long, value_parser = list)]
    sigma: Option<List>,
    /// Scatter matrix, rows separated by `;`
    #[arg(long, value_parser = matrix, allow_hyphen_values = true)]
    cov: Option<Matrix>,
    /// TOML model file with `mu`, `cov` and optional `generator`, `nu`
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct GridArgs {
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    theta_min: Option<f64>,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    theta_max: Option<f64>,
    #[arg(long)]
    theta_count: Option<usize>,
}

#[derive(Debug, Args, Default)]
struct PortfolioArgs {
    /// Number of random candidates
    #[arg(long)]
    n_candidates: Option<usize>,
    /// Portfolio scale every candidate is moved to
    #[arg(long, value_parser = finite)]
    target_vol: Option<f64>,
    /// Reject candidates with negative weights
    #[arg(long)]
    long_only: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct OmegaArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    law: LawArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Threshold θ (default 0)
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    theta: Option<f64>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    law: LawArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Emit log10 Ω
    #[arg(long)]
    log: bool,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long)]
    n_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
    /// `min:max:count` for the first coordinate
    #[arg(long, value_parser = range, allow_hyphen_values = true)]
    x_range: Option<AxisRange>,
    /// `min:max:count` for the second coordinate
    #[arg(long, value_parser = range, allow_hyphen_values = true)]
    y_range: Option<AxisRange>,
}

#[derive(Debug, Args)]
struct OptimizeArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[command(flatten)]
    portfolio: PortfolioArgs,
    #[arg(long, value_parser = finite, allow_hyphen_values = true)]
    theta: Option<f64>,
}

#[derive(Debug, Args)]
struct ExistenceArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    generator: GeneratorArgs,
}

#[derive(Debug, Args)]
struct EquivalenceArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[command(flatten)]
    portfolio: PortfolioArgs,
    #[command(flatten)]
    grid: GridArgs,
    /// Long-form ranking CSV (default: next to --output as `<stem>.long.csv`)
    #[arg(long, value_name = "FILE")]
    long_output: Option<PathBuf>,
    /// fixed-volatility, constraint-off or empirical-lognormal
    #[arg(long)]
    mode: Option<String>,
    /// Draws for the empirical-lognormal mode
    #[arg(long)]
    n_samples: Option<usize>,
}

/// Values a config file may supply; keys mirror the flags with `_` for `-`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    output: Option<PathBuf>,
    generator: Option<String>,
    nu: Option<f64>,
    mu: Option<Numbers>,
    sigma: Option<Numbers>,
    cov: Option<Vec<Vec<f64>>>,
    labels: Option<Vec<String>>,
    returns: Option<PathBuf>,
    model: Option<PathBuf>,
    theta: Option<f64>,
    theta_min: Option<f64>,
    theta_max: Option<f64>,
    theta_count: Option<usize>,
    log: Option<bool>,
    n_samples: Option<usize>,
    seed: Option<u64>,
    x_range: Option<String>,
    y_range: Option<String>,
    n_candidates: Option<usize>,
    target_vol: Option<f64>,
    long_only: Option<bool>,
    long_output: Option<PathBuf>,
    mode: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Numbers {
    One(f64),
    Many(Vec<f64>),
}

impl Numbers {
    fn into_vec(self) -> Vec<f64> {
        match self {
            Numbers::One(x) => vec![x],
            Numbers::Many(xs) => xs,
        }
    }
}

/// Family of a generator, built at run time so that parameters such as
/// `ν = 1` parse and are rejected by the existence check instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorSpec {
    Normal,
    StudentT(f64),
    Cauchy,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Laws { mu: Vec<f64>, sigma: Vec<f64>, labels: Vec<String>, generator: GeneratorSpec },
    Returns(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Inline {
        mu: Vec<f64>,
        cov: Vec<Vec<f64>>,
        generator: GeneratorSpec,
    },
    /// A generator given on the command line overrides the file's.
    File {
        path: PathBuf,
        generator: Option<GeneratorSpec>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortfolioOptions {
    pub n_candidates: usize,
    pub target_vol: f64,
    pub long_only: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptions {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Omega {
        source: Source,
        theta: f64,
    },
    Curve {
        source: Source,
        grid: GridOptions,
        log: bool,
    },
    Sample {
        model: ModelSource,
        n_samples: usize,
        seed: u64,
    },
    DensityGrid {
        model: ModelSource,
        x: Option<AxisRange>,
        y: Option<AxisRange>,
    },
    Optimize {
        model: ModelSource,
        portfolio: PortfolioOptions,
        theta: f64,
    },
    CheckExistence {
        generator: GeneratorSpec,
    },
    Equivalence {
        model: ModelSource,
        portfolio: PortfolioOptions,
        grid: GridOptions,
        mode: ReportMode,
        n_samples: usize,
        long_output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub output: Option<PathBuf>,
}

fn finite(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(finite).collect()
}

fn matrix(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';').map(list).collect()
}

fn range(s: &str) -> Result<AxisRange, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("`{s}` is not min:max:count"));
    }
    let count: usize = parts[2].trim().parse().map_err(|_| format!("`{}` is not a count", parts[2]))?;
    AxisRange::new(finite(parts[0])?, finite(parts[1])?, count).map_err(|e| e.to_string())
}

fn load_config(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => {
                let before = &text[..span.start];
                let line = before.matches('\n').count() as u64 + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (Some(line), Some(column))
            }
            None => (None, None),
        };
        CliError::Parse(ParseError { path: path.to_path_buf(), line, column, message: e.message().to_string() })
    })
}

fn require_file(flag: &str, path: &Path) -> Result<(), UsageError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(UsageError::flag(flag, format!("file `{}` does not exist", path.display())))
    }
}

fn generator_spec(args: GeneratorArgs, config: &ConfigFile) -> Result<GeneratorSpec, UsageError> {
    let kind = args.generator.or_else(|| config.generator.clone()).unwrap_or_else(|| "normal".into());
    let nu = args.nu.or(config.nu);
    match kind.to_ascii_lowercase().replace('-', "_").as_str() {
        "normal" | "gaussian" => Ok(GeneratorSpec::Normal),
        "cauchy" => Ok(GeneratorSpec::Cauchy),
        "student_t" | "t" => match nu {
            Some(nu) if nu > 0.0 => Ok(GeneratorSpec::StudentT(nu)),
            Some(nu) => Err(UsageError::flag("--nu", format!("degrees of freedom must be positive, got {nu}"))),
            None => Err(UsageError::flag("--nu", "required with --generator student_t")),
        },
        other => {
            Err(UsageError::flag("--generator", format!("unknown generator `{other}` (normal, student_t, cauchy)")))
        }
    }
}

fn seed(flag: Option<u64>, config: &ConfigFile) -> Result<u64, UsageError> {
    if let Some(seed) = flag.or(config.seed) {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(value) => value
            .trim()
            .parse()
            .map_err(|_| UsageError::flag(SEED_ENV, format!("`{value}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn source(law: LawArgs, generator: GeneratorArgs, config: &mut ConfigFile) -> Result<Source, UsageError> {
    let returns = law.returns.or_else(|| config.returns.take());
    let mu = law.mu.or_else(|| config.mu.take().map(Numbers::into_vec));
    let sigma = law.sigma.or_else(|| config.sigma.take().map(Numbers::into_vec));
    if let Some(path) = returns {
        if mu.is_some() || sigma.is_some() {
            return Err(UsageError::flag("--returns", "cannot be combined with --mu/--sigma"));
        }
        require_file("--returns", &path)?;
        return Ok(Source::Returns(path));
    }
    let mu = mu.ok_or_else(|| UsageError::flag("--mu", "required (or give --returns)"))?;
    let sigma = sigma.ok_or_else(|| UsageError::flag("--sigma", "required (or give --returns)"))?;
    if mu.len() != sigma.len() {
        return Err(UsageError::flag("--sigma", format!("{} scales for {} locations", sigma.len(), mu.len())));
    }
    if let Some(bad) = sigma.iter().find(|s| !(**s > 0.0)) {
        return Err(UsageError::flag("--sigma", format!("scale must be positive, got {bad}")));
    }
    let labels = match law.labels.or_else(|| config.labels.take()) {
        Some(labels) if labels.len() != mu.len() => {
            return Err(UsageError::flag("--labels", format!("{} labels for {} laws", labels.len(), mu.len())));
        }
        Some(labels) => labels,
        None => (1..=mu.len()).map(|i| format!("law{i}")).collect(),
    };
    let generator = generator_spec(generator, config)?;
    Ok(Source::Laws { mu, sigma, labels, generator })
}

fn model_source(
    model: ModelArgs,
    generator: GeneratorArgs,
    config: &mut ConfigFile,
) -> Result<ModelSource, UsageError> {
    let file = model.model.or_else(|| config.model.take());
    let mu = model.mu.or_else(|| config.mu.take().map(Numbers::into_vec));
    let sigma = model.sigma.or_else(|| config.sigma.take().map(Numbers::into_vec));
    let cov = model.cov.or_else(|| config.cov.take());
    let generator_given = generator.generator.is_some() || generator.nu.is_some() || config.generator.is_some();
    let spec = generator_spec(generator, config)?;
    if let Some(path) = file {
        if mu.is_some() || sigma.is_some() || cov.is_some() {
            return Err(UsageError::flag("--model", "cannot be combined with --mu/--sigma/--cov"));
        }
        require_file("--model", &path)?;
        return Ok(ModelSource::File { path, generator: generator_given.then_some(spec) });
    }
    let mu = mu.ok_or_else(|| UsageError::flag("--mu", "required (or give --model)"))?;
    let cov = match (cov, sigma) {
        (Some(_), Some(_)) => return Err(UsageError::flag("--cov", "give either --cov or --sigma, not both")),
        (Some(cov), None) => cov,
        (None, Some(sigma)) => {
            if sigma.len() != mu.len() {
                return Err(UsageError::flag("--sigma", format!("{} scales for {} locations", sigma.len(), mu.len())));
            }
            let n = sigma.len();
            (0..n).map(|i| (0..n).map(|j| if i == j { sigma[i] * sigma[i] } else { 0.0 }).collect()).collect()
        }
        (None, None) => return Err(UsageError::flag("--cov", "required (or give --sigma or --model)")),
    };
    if cov.len() != mu.len() || cov.iter().any(|row| row.len() != mu.len()) {
        return Err(UsageError::flag("--cov", format!("must be {0}×{0} to match --mu", mu.len())));
    }
    Ok(ModelSource::Inline { mu, cov, generator: spec })
}

fn grid(args: GridArgs, config: &ConfigFile) -> Result<GridOptions, UsageError> {
    let out = GridOptions {
        min: args.theta_min.or(config.theta_min),
        max: args.theta_max.or(config.theta_max),
        count: args.theta_count.or(config.theta_count),
    };
    if out.count == Some(0) {
        return Err(UsageError::flag("--theta-count", "must be at least 1"));
    }
    if let (Some(lo), Some(hi)) = (out.min, out.max) {
        if !(hi > lo) && out.count != Some(1) {
            return Err(UsageError::flag("--theta-max", format!("must exceed --theta-min ({hi} <= {lo})")));
        }
    }
    Ok(out)
}

fn portfolio(args: PortfolioArgs, config: &ConfigFile) -> Result<PortfolioOptions, UsageError> {
    let target_vol =
        args.target_vol.or(config.target_vol).ok_or_else(|| UsageError::flag("--target-vol", "required"))?;
    if !(target_vol > 0.0) {
        return Err(UsageError::flag("--target-vol", format!("must be positive, got {target_vol}")));
    }
    let n_candidates = args.n_candidates.or(config.n_candidates).unwrap_or(DEFAULT_CANDIDATES);
    if n_candidates == 0 {
        return Err(UsageError::flag("--n-candidates", "must be at least 1"));
    }
    Ok(PortfolioOptions {
        n_candidates,
        target_vol,
        long_only: args.long_only || config.long_only.unwrap_or(false),
        seed: seed(args.seed, config)?,
    })
}

fn config_range(flag: &str, value: Option<String>) -> Result<Option<AxisRange>, UsageError> {
    value.map(|s| range(&s).map_err(|e| UsageError::flag(flag, e))).transpose()
}

fn mode(value: Option<String>) -> Result<ReportMode, UsageError> {
    match value.as_deref() {
        None | Some("fixed-volatility") | Some("fixed") => Ok(ReportMode::FixedVolatility),
        Some("constraint-off") | Some("unconstrained") => Ok(ReportMode::ConstraintOff),
        Some("empirical-lognormal") | Some("lognormal") => Ok(ReportMode::EmpiricalLognormal),
        Some(other) => Err(UsageError::flag(
            "--mode",
            format!("unknown mode `{other}` (fixed-volatility, constraint-off, empirical-lognormal)"),
        )),
    }
}

fn common(args: &Common) -> Result<ConfigFile, CliError> {
    match &args.config {
        Some(path) => {
            require_file("--config", path)?;
            load_config(path)
        }
        None => Ok(ConfigFile::default()),
    }
}

/// Parses `argv` (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        // help and version requests print and exit 0
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            e.exit()
        }
        _ => CliError::Usage(UsageError::general(e.to_string().trim_end().trim_start_matches("error: ").to_string())),
    })?;

    let (command, output) = match cli.command {
        Sub::Omega(a) => {
            let mut config = common(&a.common)?;
            let output = a.common.output.or_else(|| config.output.take());
            let theta = a.theta.or(config.theta).unwrap_or(0.0);
            (Command::Omega { source: source(a.law, a.generator, &mut config)?, theta }, output)
        }
        Sub::Curve(a) => {
            let mut config = common(&a.common)?;
            let output = a.common.output.or_else(|| config.output.take());
            let grid = grid(a.grid, &config)?;
            let log = a.log || config.log.unwrap_or(false);
            (Command::Curve { source: source(a.law, a.generator, &mut config)?, grid, log }, output)
        }
        Sub::Sample(a) => {
            let mut config = common(&a.common)?;
            let output = a.common.output.or_else(|| config.output.take());
            let n_samples = a.n_samples.or(config.n_samples).unwrap_or(DEFAULT_SAMPLES);
            if n_samples == 0 {
                return Err(UsageError::flag("--n-samples", "must be at least 1").into());
            }
            let seed = seed(a.seed, &config)?;
            (Command::Sample { model: model_source(a.model, a.generator, &mut config)?, n_samples, seed }, output)
        }
        Sub::DensityGrid(a) => {
            let mut config = common(&a.common)?;
            let output = a.common.output.or_else(|| config.output.take());
            let x = match a.x_range {
                Some(r) => Some(r),
                None => config_range("--x-range", config.x_range.take())?,
            };
            let y = match a.y_range {
                Some(r) => Some(r),
                None => config_range("--y-range", config.y_range.take())?,
            };
            (Command::DensityGrid { model: model_source(a.model, a.generator, &mut config)?, x, y }, output)
        }
        Sub::Optimize(a) => {
            let mut config = common(&a.common)?;
            let output = a.common.output.or_else(|| config.output.take());
            let theta = a.theta.or(config.theta).unwrap_or(0.0);
            let portfolio = portfolio(a.portfolio, &config)?;
            (Command::Optimize { model: model_source(a.model, a.generator, &mut config)?, portfolio, theta }, output)
        }
        Sub::CheckExistence(a) => {
            let mut config = common(&a.common)?;
            let output = a.common.output.or_else(|| config.output.take());
            (Command::CheckExistence { generator: generator_spec(a.generator, &config)? }, output)
        }
        Sub::Equivalence(a) => {
            let mut config = common(&a.common)?;
            let output = a.common.output.or_else(|| config.output.take());
            let grid = grid(a.grid, &config)?;
            let portfolio = portfolio(a.portfolio, &config)?;
            let mode = mode(a.mode.or_else(|| config.mode.take()))?;
            let n_samples = a.n_samples.or(config.n_samples).unwrap_or(DEFAULT_REPORT_DRAWS);
            let long_output = a.long_output.or_else(|| config.long_output.take());
            let model = model_source(a.model, a.generator, &mut config)?;
            (Command::Equivalence { model, portfolio, grid, mode, n_samples, long_output }, output)
        }
    };
    Ok(RunConfig { command, output })
}
