//! Return CSVs and TOML model files.

use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use omega_core::{EllipticalModel, Generator, ReturnSeries};

use crate::args::GeneratorSpec;
use crate::error::{CliError, ParseError};

fn parse_error(path: &Path, line: Option<u64>, column: Option<usize>, message: impl Into<String>) -> CliError {
    CliError::Parse(ParseError { path: path.to_path_buf(), line, column, message: message.into() })
}

/// Reads `date,<label>,...` with one row per period. The first column is
/// kept opaque; every other cell must be a finite number.
pub fn load_returns(path: &Path) -> Result<Vec<ReturnSeries>, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path).map_err(|e| {
        match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Io(std::io::Error::other(format!("{}: {e}", path.display()))),
            _ => parse_error(path, None, None, e.to_string()),
        }
    })?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if headers.len() < 2 {
        return Err(parse_error(path, Some(1), None, "header needs a date column and at least one return column"));
    }
    let labels: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    if let Some(i) = labels.iter().position(|l| l.is_empty()) {
        return Err(parse_error(path, Some(1), Some(i + 2), "empty column label"));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map(|p| p.line());
        for (k, cell) in record.iter().skip(1).enumerate() {
            let value: f64 =
                cell.parse().map_err(|_| parse_error(path, line, Some(k + 2), format!("`{cell}` is not a number")))?;
            if !value.is_finite() {
                return Err(parse_error(path, line, Some(k + 2), format!("`{cell}` is not finite")));
            }
            columns[k].push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(parse_error(path, None, None, "no rows"));
    }
    labels
        .into_iter()
        .zip(columns)
        .map(|(label, returns)| ReturnSeries::new(Some(label), returns).map_err(CliError::from))
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::UnequalLengths { expected_len, len, .. } => {
            parse_error(path, line, None, format!("expected {expected_len} fields, found {len}"))
        }
        csv::ErrorKind::Io(io) => CliError::Io(io),
        kind => parse_error(path, line, None, format!("{kind:?}")),
    }
}

/// `mu = [...]`, `cov = [[...], ...]` and an optional `[generator]` table
/// with `kind` and `nu`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    mu: Vec<f64>,
    cov: Vec<Vec<f64>>,
    generator: Option<GeneratorTable>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorTable {
    kind: String,
    nu: Option<f64>,
}

pub fn build_generator(spec: GeneratorSpec) -> Result<Generator, CliError> {
    Ok(match spec {
        GeneratorSpec::Normal => Generator::normal(),
        GeneratorSpec::StudentT(nu) => Generator::student_t(nu)?,
        GeneratorSpec::Cauchy => Generator::cauchy(),
    })
}

pub fn build_model(mu: Vec<f64>, cov: &[Vec<f64>], spec: GeneratorSpec) -> Result<EllipticalModel, CliError> {
    let n = mu.len();
    let flat: Vec<f64> = cov.iter().flatten().copied().collect();
    let sigma = DMatrix::from_row_slice(n, n, &flat);
    Ok(EllipticalModel::new(mu, sigma, build_generator(spec)?)?)
}

pub fn load_model(path: &Path, generator: Option<GeneratorSpec>) -> Result<EllipticalModel, CliError> {
    let text = std::fs::read_to_string(path)?;
    let file: ModelFile = toml::from_str(&text).map_err(|e| {
        let (line, column) = e.span().map_or((None, None), |span| {
            let before = &text[..span.start];
            let line = before.matches('\n').count() as u64 + 1;
            let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
            (Some(line), Some(column))
        });
        parse_error(path, line, column, e.message())
    })?;
    let n = file.mu.len();
    if n == 0 {
        return Err(parse_error(path, None, None, "`mu` is empty"));
    }
    if file.cov.len() != n || file.cov.iter().any(|row| row.len() != n) {
        return Err(parse_error(path, None, None, format!("`cov` must be {n}×{n} to match `mu`")));
    }
    let spec = match (generator, file.generator) {
        (Some(spec), _) => spec,
        (None, None) => GeneratorSpec::Normal,
        (None, Some(table)) => match table.kind.to_ascii_lowercase().replace('-', "_").as_str() {
            "normal" | "gaussian" => GeneratorSpec::Normal,
            "cauchy" => GeneratorSpec::Cauchy,
            "student_t" | "t" => match table.nu {
                Some(nu) => GeneratorSpec::StudentT(nu),
                None => return Err(parse_error(path, None, None, "generator `student_t` needs `nu`")),
            },
            other => return Err(parse_error(path, None, None, format!("unknown generator `{other}`"))),
        },
    };
    build_model(file.mu, &file.cov, spec)
}
