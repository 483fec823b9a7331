use std::io::{self, Write};

use crate::elliptical::{AxisRange, UnivariateLaw};
use crate::error::{Error, Result};
use crate::format::shortest;
use crate::omega::{existence_check, omega_closed_form, omega_empirical, OmegaValue, ReturnSeries, Threshold};

pub const DEFAULT_CURVE_POINTS: usize = 201;

#[derive(Debug, Clone, PartialEq)]
pub struct CurveColumn {
    pub label: String,
    pub values: Vec<OmegaValue>,
}

/// Ω(θ) per law over a θ grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaCurve {
    pub thetas: Vec<f64>,
    pub columns: Vec<CurveColumn>,
}

impl OmegaCurve {
    /// CSV with header `theta,<label1>,...`; `log₁₀ Ω` when `log10` is set.
    pub fn write_csv<W: Write>(&self, mut out: W, log10: bool) -> io::Result<()> {
        write!(out, "theta")?;
        for column in &self.columns {
            write!(out, ",{}", column.label)?;
        }
        writeln!(out)?;
        for (i, theta) in self.thetas.iter().enumerate() {
            write!(out, "{}", shortest(*theta))?;
            for column in &self.columns {
                write!(out, ",{}", column.values[i].to_cell(log10))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// `count` points spanning `[min(μ − 4σ), max(μ + 4σ)]` over the laws.
pub fn default_theta_grid(laws: &[UnivariateLaw], count: Option<usize>) -> Result<AxisRange> {
    if laws.is_empty() {
        return Err(Error::InvalidArgument("no laws to span".into()));
    }
    let lo = laws.iter().map(|l| l.mu() - 4.0 * l.sigma()).fold(f64::INFINITY, f64::min);
    let hi = laws.iter().map(|l| l.mu() + 4.0 * l.sigma()).fold(f64::NEG_INFINITY, f64::max);
    AxisRange::new(lo, hi, count.unwrap_or(DEFAULT_CURVE_POINTS))
}

/// Closed-form Ω for each labelled law at every grid point.
pub fn omega_curve(laws: &[(String, UnivariateLaw)], grid: &AxisRange) -> Result<OmegaCurve> {
    for (_, law) in laws {
        if !existence_check(law.generator()).is_defined() {
            return Err(Error::Undefined { tail_index: law.generator().tail_index() });
        }
    }
    let thetas = grid.points();
    let mut columns = Vec::with_capacity(laws.len());
    for (label, law) in laws {
        let eval = |theta: &f64| omega_closed_form(law, Threshold::new(*theta)?);
        #[cfg(feature = "parallel")]
        let values: Result<Vec<OmegaValue>> = {
            use rayon::prelude::*;
            thetas.par_iter().map(eval).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let values: Result<Vec<OmegaValue>> = thetas.iter().map(eval).collect();
        columns.push(CurveColumn { label: label.clone(), values: values? });
    }
    Ok(OmegaCurve { thetas, columns })
}

/// Empirical Ω for each series at every grid point.
pub fn empirical_curve(series: &[ReturnSeries], grid: &AxisRange) -> Result<OmegaCurve> {
    let thetas = grid.points();
    let mut columns = Vec::with_capacity(series.len());
    for (i, s) in series.iter().enumerate() {
        let values =
            thetas.iter().map(|t| Threshold::new(*t).map(|t| omega_empirical(s, t))).collect::<Result<Vec<_>>>()?;
        let label = s.label.clone().unwrap_or_else(|| format!("series{}", i + 1));
        columns.push(CurveColumn { label, values });
    }
    Ok(OmegaCurve { thetas, columns })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptical::Generator;

    #[test]
    fn single_normal_curve_decreases_through_one() {
        let law = UnivariateLaw::normal(0.05, 0.1).unwrap();
        let grid = AxisRange::new(-0.35, 0.45, 81).unwrap();
        let curve = omega_curve(&[("a".into(), law)], &grid).unwrap();
        let values: Vec<f64> = curve.columns[0].values.iter().map(|v| v.as_f64()).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
        let at_mean = curve.thetas.iter().position(|t| (t - 0.05).abs() < 1e-12).unwrap();
        assert!((values[at_mean] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn far_left_values_are_large() {
        let law = UnivariateLaw::normal(0.0, 1.0).unwrap();
        let grid = AxisRange::new(-4.0, -4.0, 1).unwrap();
        let curve = omega_curve(&[("a".into(), law)], &grid).unwrap();
        assert!(curve.columns[0].values[0].as_f64() > 1e3);
    }

    #[test]
    fn higher_mean_dominates() {
        let low = UnivariateLaw::normal(0.02, 0.1).unwrap();
        let high = UnivariateLaw::normal(0.06, 0.1).unwrap();
        let grid = default_theta_grid(&[low.clone(), high.clone()], None).unwrap();
        assert_eq!(grid.count, 201);
        let curve = omega_curve(&[("low".into(), low), ("high".into(), high)], &grid).unwrap();
        for i in 0..curve.thetas.len() {
            assert!(curve.columns[1].values[i].as_f64() > curve.columns[0].values[i].as_f64());
        }
    }

    #[test]
    fn undefined_law_is_rejected() {
        let law = UnivariateLaw::new(0.0, 1.0, Generator::cauchy()).unwrap();
        let grid = AxisRange::new(-1.0, 1.0, 3).unwrap();
        assert!(matches!(omega_curve(&[("c".into(), law)], &grid), Err(Error::Undefined { .. })));
    }

    #[test]
    fn csv_header_and_literals() {
        let s = ReturnSeries::new(Some("fund".into()), vec![0.01, 0.02]).unwrap();
        let grid = AxisRange::new(0.0, 0.03, 4).unwrap();
        let curve = empirical_curve(&[s], &grid).unwrap();
        let mut buf = Vec::new();
        curve.write_csv(&mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta,fund");
        assert_eq!(lines[1], "0,inf");
        assert_eq!(lines[4], "0.03,-inf");
    }
}
