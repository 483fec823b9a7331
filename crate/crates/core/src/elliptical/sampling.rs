//! Sampling through the stochastic representation `X = μ + R Λᵀ U`, with `U`
//! uniform on the unit sphere of dimension `rank(Σ)` and `R` independent of `U`.
//!
//! Draws are produced in fixed-size chunks, each with its own ChaCha stream
//! derived from the seed, so the output does not depend on how many threads
//! run the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::elliptical::{EllipticalModel, Generator, GeneratorKind};
use crate::error::{Error, Result};
use crate::quadrature::{self, Decay, Tolerance};

const CHUNK: usize = 1024;
const INVERSION_TOL: f64 = 1e-10;

/// Realizations of a model, row-major, with the radius `R` of each draw.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub dim: usize,
    pub seed: u64,
    pub draws: Vec<f64>,
    pub radii: Vec<f64>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.draws[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks_exact(self.dim)
    }

    /// `wᵀ x` for every draw.
    pub fn project(&self, weights: &[f64]) -> Result<Vec<f64>> {
        if weights.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: weights.len() });
        }
        Ok(self.rows().map(|x| x.iter().zip(weights).map(|(a, b)| a * b).sum()).collect())
    }
}

/// Law of the generating variate `R`.
#[derive(Debug, Clone)]
pub enum RadialLaw {
    /// `R² ~ χ²_k`.
    Chi,
    /// `R = |Z| / sqrt(W/ν)`, `W ~ χ²_ν`.
    StudentT(f64),
    /// Numerical inverse of the CDF of `r^(k-1) g(-r²/2)`.
    Tabulated(RadialTable),
}

impl RadialLaw {
    pub fn for_generator(generator: &Generator, rank: usize) -> Result<Self> {
        Ok(match generator.kind() {
            GeneratorKind::Normal => RadialLaw::Chi,
            GeneratorKind::StudentT(nu) => RadialLaw::StudentT(*nu),
            GeneratorKind::Cauchy => RadialLaw::StudentT(1.0),
            GeneratorKind::Custom(_) => RadialLaw::Tabulated(RadialTable::new(generator, rank)?),
        })
    }
}

/// Cumulative radial mass on a grid, refined by bisection inside a cell.
#[derive(Debug, Clone)]
pub struct RadialTable {
    generator: Generator,
    dim: usize,
    nodes: Vec<f64>,
    cumulative: Vec<f64>,
    tail: f64,
    tail_power: Option<f64>,
}

impl RadialTable {
    pub fn new(generator: &Generator, dim: usize) -> Result<Self> {
        let decay = generator.radial_decay(dim);
        let tail_power = match decay {
            Decay::Power(p) if p > 1.0 => Some(p),
            Decay::Power(p) => {
                return Err(Error::NoRadialSampler(format!("radial density decays like r^-{p}")));
            }
            Decay::Rapid => None,
        };
        let density = radial_density(generator, dim);
        let mut nodes = vec![0.0];
        let mut cumulative = vec![0.0];
        let mut r = 0.0;
        let tail = loop {
            let next = if r < 4.0 { r + 0.125 } else { r * 1.25 };
            let cell = quadrature::integrate(&density, r, next, Tolerance::default())
                .map_err(|e| Error::NoRadialSampler(e.to_string()))?;
            let total = cumulative.last().copied().unwrap_or(0.0) + cell.value;
            nodes.push(next);
            cumulative.push(total);
            r = next;
            let f = density(r);
            let remainder = match tail_power {
                Some(p) => f * r / (p - 1.0),
                None => f * r,
            };
            if r > 1.0 && remainder <= 1e-13 * total {
                break if tail_power.is_some() { remainder } else { 0.0 };
            }
            if nodes.len() > 20_000 || !total.is_finite() {
                return Err(Error::NoRadialSampler("radial CDF did not converge".into()));
            }
        };
        Ok(Self { generator: generator.clone(), dim, nodes, cumulative, tail, tail_power })
    }

    fn total(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1] + self.tail
    }

    /// `F_R⁻¹(p)` for `p` in `[0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        let target = p * self.total();
        let last = self.cumulative[self.cumulative.len() - 1];
        let r_max = self.nodes[self.nodes.len() - 1];
        if target >= last {
            return Ok(match self.tail_power {
                Some(power) if self.tail > 0.0 => {
                    let left = (self.total() - target).max(f64::MIN_POSITIVE);
                    r_max * (self.tail / left).powf(1.0 / (power - 1.0))
                }
                _ => r_max,
            });
        }
        let cell = self.cumulative.partition_point(|&c| c <= target) - 1;
        let (mut lo, mut hi) = (self.nodes[cell], self.nodes[cell + 1]);
        let base = self.cumulative[cell];
        let start = lo;
        let density = radial_density(&self.generator, self.dim);
        for _ in 0..200 {
            if hi - lo <= INVERSION_TOL * hi.max(1.0) {
                return Ok(0.5 * (lo + hi));
            }
            let mid = 0.5 * (lo + hi);
            let mass = quadrature::integrate(&density, start, mid, Tolerance::default())
                .map_err(|e| Error::NoRadialSampler(e.to_string()))?
                .value;
            if base + mass < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NoRadialSampler(format!("bisection did not converge for p = {p}")))
    }
}

fn radial_density(generator: &Generator, dim: usize) -> impl Fn(f64) -> f64 + '_ {
    let power = dim as f64 - 1.0;
    move |r: f64| r.powf(power) * generator.density_kernel(-0.5 * r * r, dim)
}

/// Draws `n_samples` realizations of `model`.
pub fn sample(model: &EllipticalModel, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be at least 1".into()));
    }
    let radial = RadialLaw::for_generator(model.generator(), model.rank())?;
    let chunks = n_samples.div_ceil(CHUNK);
    let run = |c: usize| {
        let len = CHUNK.min(n_samples - c * CHUNK);
        sample_chunk(model, &radial, seed, c as u64, len)
    };

    #[cfg(feature = "parallel")]
    let parts: Vec<Result<(Vec<f64>, Vec<f64>)>> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..chunks).map(run).collect();

    let mut draws = Vec::with_capacity(n_samples * model.dim());
    let mut radii = Vec::with_capacity(n_samples);
    for part in parts {
        let (d, r) = part?;
        draws.extend(d);
        radii.extend(r);
    }
    Ok(SampleBatch { dim: model.dim(), seed, draws, radii })
}

fn sample_chunk(
    model: &EllipticalModel,
    radial: &RadialLaw,
    seed: u64,
    stream: u64,
    len: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let n = model.dim();
    let k = model.rank();
    let factor = model.factor();
    let mu = model.mu();
    let chi_nu = match radial {
        RadialLaw::StudentT(nu) => Some(ChiSquared::new(*nu).map_err(|e| Error::NoRadialSampler(e.to_string()))?),
        _ => None,
    };

    let mut draws = Vec::with_capacity(len * n);
    let mut radii = Vec::with_capacity(len);
    let mut z = vec![0.0; k];
    for _ in 0..len {
        let norm = loop {
            for zi in z.iter_mut() {
                *zi = StandardNormal.sample(&mut rng);
            }
            let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        let r = match radial {
            RadialLaw::Chi => norm,
            RadialLaw::StudentT(nu) => {
                let w: f64 = chi_nu.as_ref().expect("chi-squared set for t").sample(&mut rng);
                norm / (w / nu).sqrt()
            }
            RadialLaw::Tabulated(table) => table.quantile(rng.random::<f64>())?,
        };
        // R · U with U = z / |z|
        let scale = r / norm;
        for c in 0..n {
            let mut x = mu[c];
            for (row, zr) in z.iter().enumerate() {
                x += factor[(row, c)] * zr * scale;
            }
            draws.push(x);
        }
        radii.push(r);
    }
    Ok((draws, radii))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn same_seed_same_batch() {
        let model =
            EllipticalModel::new(vec![0.0, 1.0], DMatrix::identity(2, 2), Generator::student_t(4.0).unwrap()).unwrap();
        let a = sample(&model, 3000, 7).unwrap();
        let b = sample(&model, 3000, 7).unwrap();
        assert_eq!(a, b);
        let c = sample(&model, 3000, 8).unwrap();
        assert_ne!(a.draws, c.draws);
    }

    #[test]
    fn zero_samples_rejected() {
        let model = EllipticalModel::new(vec![0.0], DMatrix::identity(1, 1), Generator::normal()).unwrap();
        assert!(sample(&model, 0, 1).is_err());
    }

    #[test]
    fn rank_deficient_draws_stay_on_the_subspace() {
        // Σ = v vᵀ with v = (1, 2): draws lie on the line x2 = 2 x1 through μ
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let model = EllipticalModel::new(vec![0.5, 1.0], sigma, Generator::normal()).unwrap();
        let batch = sample(&model, 500, 3).unwrap();
        for x in batch.rows() {
            assert!(((x[1] - 1.0) - 2.0 * (x[0] - 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_gaussian_radius_is_chi() {
        // custom exp kernel in 3 dimensions: R² ~ χ²_3, so F_R(r) = P(χ²_3 <= r²)
        let custom = Generator::custom("exp", f64::exp, f64::INFINITY).unwrap();
        let table = RadialTable::new(&custom, 3).unwrap();
        for (p, r) in [(0.5, 1.538_172_254_455_052), (0.9, 2.500_277_710_809_406)] {
            let q = table.quantile(p).unwrap();
            assert!((q - r).abs() < 1e-6, "p={p}: {q}");
        }
    }

    #[test]
    fn tabulated_power_tail_quantile() {
        // 1-D kernel (1 - 2x)^-1 → density ∝ 1/(1+r²) on r > 0, F(r) = 2 atan(r)/π
        let custom = Generator::custom("cauchy-like", |x: f64| 1.0 / (1.0 - 2.0 * x), 1.0).unwrap();
        let table = RadialTable::new(&custom, 1).unwrap();
        for p in [0.1, 0.5, 0.99, 0.999_999] {
            let expected = (0.5 * std::f64::consts::PI * p).tan();
            let q = table.quantile(p).unwrap();
            assert!((q / expected - 1.0).abs() < 1e-6, "p={p}: {q} vs {expected}");
        }
    }
}
