use std::io::{self, Write};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use statrs::function::gamma::ln_gamma;

use crate::elliptical::Generator;
use crate::error::{Error, Result};
use crate::format::shortest;
use crate::quadrature::{self, Tolerance};

const SYMMETRY_TOL: f64 = 1e-12;
const RANK_TOL: f64 = 1e-10;

/// Multivariate elliptical law `EC_n(μ, Σ, g)`.
///
/// `Σ = Λᵀ Λ` with `Λ` (k × n) taken from the spectral decomposition, keeping
/// eigenvalues above `1e-10 · λ_max`; `k` is the rank.
#[derive(Debug, Clone)]
pub struct EllipticalModel {
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    generator: Generator,
    rank: usize,
    factor: DMatrix<f64>,
    pseudo_inverse: DMatrix<f64>,
    log_det: f64,
    density_constant: Option<f64>,
}

impl EllipticalModel {
    pub fn new(mu: Vec<f64>, sigma: DMatrix<f64>, generator: Generator) -> Result<Self> {
        let n = mu.len();
        if n == 0 {
            return Err(Error::InvalidModel("empty location vector".into()));
        }
        if sigma.nrows() != n || sigma.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: sigma.nrows().max(sigma.ncols()) });
        }
        if mu.iter().chain(sigma.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("non-finite entries".into()));
        }
        let scale = sigma.amax();
        if scale == 0.0 {
            return Err(Error::InvalidModel("scatter matrix is zero".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidModel(format!("scatter matrix not symmetric at ({i}, {j})")));
                }
            }
        }

        let eigen = SymmetricEigen::new(sigma.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
        let max_eigen = eigen.eigenvalues[order[0]];
        if !(max_eigen > 0.0) {
            return Err(Error::InvalidModel("scatter matrix has no positive eigenvalue".into()));
        }
        if eigen.eigenvalues[order[n - 1]] < -RANK_TOL * max_eigen {
            return Err(Error::InvalidModel("scatter matrix is not positive semi-definite".into()));
        }
        let kept: Vec<usize> = order.into_iter().filter(|&i| eigen.eigenvalues[i] > RANK_TOL * max_eigen).collect();
        let rank = kept.len();

        let mut factor = DMatrix::zeros(rank, n);
        let mut pseudo_inverse = DMatrix::zeros(n, n);
        let mut log_det = 0.0;
        for (row, &i) in kept.iter().enumerate() {
            let lambda = eigen.eigenvalues[i];
            let v = eigen.eigenvectors.column(i);
            // fix the eigenvector sign so the factor is reproducible
            let pivot = v.iter().copied().fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
            let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
            for c in 0..n {
                factor[(row, c)] = sign * lambda.sqrt() * v[c];
            }
            pseudo_inverse += (v * v.transpose()) / lambda;
            log_det += lambda.ln();
        }

        if !generator.supports_dimension(rank) {
            return Err(Error::NonNormalizable(format!("{} in dimension {rank}", generator.kind())));
        }
        let density_constant = if rank == n { Some(radial_constant(&generator, n)?) } else { None };

        Ok(Self {
            mu: DVector::from_vec(mu),
            sigma,
            generator,
            rank,
            factor,
            pseudo_inverse,
            log_det,
            density_constant,
        })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    /// `Λ` with `Λᵀ Λ = Σ`, shape (rank × n).
    pub fn factor(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn pseudo_inverse(&self) -> &DMatrix<f64> {
        &self.pseudo_inverse
    }

    /// `(x − μ)ᵀ Σ⁻ (x − μ)`, with the pseudo-inverse for singular `Σ`.
    pub fn mahalanobis_q(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x.len())?;
        let n = self.dim();
        let d: Vec<f64> = x.iter().zip(self.mu.iter()).map(|(a, m)| a - m).collect();
        let mut q = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.pseudo_inverse[(i, j)] * d[j];
            }
            q += d[i] * row;
        }
        Ok(q.max(0.0))
    }

    /// `C_n det(Σ)^(-1/2) g_n(-Q(x)/2)`.
    pub fn density(&self, x: &[f64]) -> Result<f64> {
        let constant = self.density_constant.ok_or(Error::RankDeficient { rank: self.rank, dim: self.dim() })?;
        let q = self.mahalanobis_q(x)?;
        Ok(constant * (-0.5 * self.log_det).exp() * self.generator.density_kernel(-0.5 * q, self.dim()))
    }

    /// Densities over the Cartesian product of two axes, for bivariate models.
    pub fn density_grid(&self, axis1: &AxisRange, axis2: &AxisRange) -> Result<DensityGrid> {
        if self.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: self.dim() });
        }
        let xs = axis1.points();
        let ys = axis2.points();
        let mut values = Vec::with_capacity(xs.len() * ys.len());
        for &x in &xs {
            for &y in &ys {
                values.push(self.density(&[x, y])?);
            }
        }
        Ok(DensityGrid { xs, ys, values })
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }
}

/// `Γ(n/2) / (2 π^(n/2) ∫_0^∞ r^(n-1) g_n(-r²/2) dr)`.
fn radial_constant(generator: &Generator, n: usize) -> Result<f64> {
    let power = n as f64 - 1.0;
    let radial = quadrature::integrate_to_infinity(
        |r| r.powf(power) * generator.density_kernel(-0.5 * r * r, n),
        0.0,
        generator.radial_decay(n),
        Tolerance::default(),
    )
    .map_err(|e| Error::NonNormalizable(format!("{} in dimension {n}: {e}", generator.kind())))?;
    let half_n = 0.5 * n as f64;
    let log_sphere = std::f64::consts::LN_2 + half_n * std::f64::consts::PI.ln() - ln_gamma(half_n);
    Ok((-log_sphere).exp() / radial.value)
}

/// Inclusive evenly spaced axis `min..=max` with `count` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisRange {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisRange {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min.is_finite() && max.is_finite()) || count == 0 || (count > 1 && !(max > min)) {
            return Err(Error::InvalidArgument(format!("bad range {min}:{max}:{count}")));
        }
        Ok(Self { min, max, count })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.max } else { self.min + step * i as f64 }).collect()
    }
}

/// Row-major density values: `values[i * ys.len() + j]` is the density at `(xs[i], ys[j])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ys.len() + j]
    }

    /// CSV with header `x,y,density`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,density")?;
        for (i, x) in self.xs.iter().enumerate() {
            for (j, y) in self.ys.iter().enumerate() {
                writeln!(out, "{},{},{}", shortest(*x), shortest(*y), shortest(self.at(i, j)))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bivariate(rho: f64, generator: Generator) -> EllipticalModel {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]);
        EllipticalModel::new(vec![0.0, 0.0], sigma, generator).unwrap()
    }

    #[test]
    fn gaussian_mode_density() {
        let sigma = DMatrix::from_row_slice(2, 2, &[0.04, 0.01, 0.01, 0.09]);
        let model = EllipticalModel::new(vec![0.05, 0.07], sigma.clone(), Generator::normal()).unwrap();
        let expected = ((2.0 * PI * sigma).determinant()).powf(-0.5);
        assert!((model.density(&[0.05, 0.07]).unwrap() / expected - 1.0).abs() < 1e-13);
    }

    #[test]
    fn standard_bivariate_normal_point() {
        let model = bivariate(0.0, Generator::normal());
        let expected = (-0.5f64).exp() / (2.0 * PI);
        assert!((model.density(&[1.0, 0.0]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn multivariate_t_density_constant() {
        // bivariate t_ν at the mode: 1/(2π) for Σ = I, any ν
        let model = bivariate(0.0, Generator::student_t(4.0).unwrap());
        assert!((model.density(&[0.0, 0.0]).unwrap() * 2.0 * PI - 1.0).abs() < 1e-12);
    }

    #[test]
    fn central_symmetry_is_exact() {
        let model = bivariate(0.6, Generator::student_t(3.0).unwrap());
        for v in [[0.3, -1.2], [2.0, 0.5], [-0.7, -0.7]] {
            let plus = model.density(&[v[0], v[1]]).unwrap();
            let minus = model.density(&[-v[0], -v[1]]).unwrap();
            assert_eq!(plus, minus);
        }
    }

    #[test]
    fn rank_deficient_density_errors() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let model = EllipticalModel::new(vec![0.0, 0.0], sigma, Generator::normal()).unwrap();
        assert_eq!(model.rank(), 1);
        assert!(matches!(model.density(&[0.0, 0.0]), Err(Error::RankDeficient { rank: 1, dim: 2 })));
        // Q still defined through the pseudo-inverse: Σ⁺ = Σ/4
        assert!((model.mahalanobis_q(&[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn factor_reproduces_scatter() {
        let sigma = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5]);
        let model = EllipticalModel::new(vec![0.0; 3], sigma.clone(), Generator::normal()).unwrap();
        let lambda = model.factor();
        assert!((lambda.transpose() * lambda - sigma).amax() < 1e-14);
    }

    #[test]
    fn construction_errors() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(EllipticalModel::new(vec![0.0, 0.0], bad, Generator::normal()).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(EllipticalModel::new(vec![0.0, 0.0], indefinite, Generator::normal()).is_err());
        assert!(EllipticalModel::new(vec![0.0, 0.0], DMatrix::zeros(2, 2), Generator::normal()).is_err());
        assert!(matches!(
            EllipticalModel::new(vec![0.0], DMatrix::identity(2, 2), Generator::normal()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mahalanobis_identity_metric() {
        let model = EllipticalModel::new(vec![1.0, 2.0, 3.0], DMatrix::identity(3, 3), Generator::normal()).unwrap();
        assert_eq!(model.mahalanobis_q(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!((model.mahalanobis_q(&[1.0, 3.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_is_rotation_symmetric_for_identity() {
        let model = bivariate(0.0, Generator::normal());
        let axis = AxisRange::new(-2.0, 2.0, 9).unwrap();
        let grid = model.density_grid(&axis, &axis).unwrap();
        let n = 9;
        for i in 0..n {
            for j in 0..n {
                // (x, y) -> (-y, x)
                let rotated = grid.at(n - 1 - j, i);
                assert!((grid.at(i, j) - rotated).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn grid_ridge_follows_first_eigenvector() {
        let model = bivariate(0.7, Generator::normal());
        let axis = AxisRange::new(-2.0, 2.0, 5).unwrap();
        let grid = model.density_grid(&axis, &axis).unwrap();
        // (1,1) lies on the major axis, (1,-1) on the minor one
        assert!(grid.at(3, 3) > grid.at(3, 1));
        assert!(grid.at(4, 4) > grid.at(4, 0));
    }

    #[test]
    fn grid_max_at_location() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, -0.3, -0.3, 2.0]);
        let model = EllipticalModel::new(vec![0.4, -0.6], sigma, Generator::student_t(5.0).unwrap()).unwrap();
        let axis = AxisRange::new(-3.0, 3.0, 31).unwrap();
        let grid = model.density_grid(&axis, &axis).unwrap();
        let (imax, _) = grid.values.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert!(grid.values.iter().all(|&v| v >= 0.0));
        // nearest grid point to μ = (0.4, -0.6) is (17, 12)
        assert_eq!((imax / 31, imax % 31), (17, 12));
    }

    #[test]
    fn grid_needs_two_dimensions() {
        let model = EllipticalModel::new(vec![0.0; 3], DMatrix::identity(3, 3), Generator::normal()).unwrap();
        let axis = AxisRange::new(-1.0, 1.0, 3).unwrap();
        assert!(matches!(model.density_grid(&axis, &axis), Err(Error::DimensionMismatch { expected: 2, got: 3 })));
    }

    #[test]
    fn grid_csv_layout() {
        let model = bivariate(0.0, Generator::normal());
        let axis = AxisRange::new(-1.0, 1.0, 2).unwrap();
        let mut buf = Vec::new();
        model.density_grid(&axis, &axis).unwrap().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,density");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("-1,1,"));
    }
}
