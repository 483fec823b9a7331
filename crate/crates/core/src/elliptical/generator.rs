use std::fmt;
use std::sync::Arc;

use libm::erfc;
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};
use crate::quadrature::{self, Decay, Tolerance};

/// Family tag of a [`Generator`].
#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    Normal,
    StudentT(f64),
    /// Student-t with one degree of freedom.
    Cauchy,
    Custom(String),
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorKind::Normal => write!(f, "normal"),
            GeneratorKind::StudentT(nu) => write!(f, "student_t({nu})"),
            GeneratorKind::Cauchy => write!(f, "cauchy"),
            GeneratorKind::Custom(name) => write!(f, "custom({name})"),
        }
    }
}

pub type KernelFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kernel {
    Exp,
    /// `(1 - 2x/ν)^(-(ν + d)/2)` in dimension `d`.
    StudentT {
        nu: f64,
    },
    Custom(KernelFn),
}

/// Density kernel `g` of a univariate elliptical family together with the tail
/// index of its CDF. The law with location 0 and scale 1 has density
/// `ψ(u) = C g(-u²/2)`.
///
/// Built-in kinds carry their standard multivariate kernels (so marginals of a
/// multivariate normal or t model stay in the same family). A custom kernel is
/// used as the density kernel in whatever dimension it is placed.
#[derive(Clone)]
pub struct Generator {
    kind: GeneratorKind,
    kernel: Kernel,
    tail_index: f64,
    constant: f64,
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("kind", &self.kind)
            .field("tail_index", &self.tail_index)
            .field("constant", &self.constant)
            .finish()
    }
}

impl PartialEq for Generator {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.tail_index == other.tail_index
    }
}

impl Generator {
    pub fn normal() -> Self {
        Self::build(GeneratorKind::Normal, Kernel::Exp, f64::INFINITY).expect("the Gaussian kernel is normalizable")
    }

    pub fn student_t(nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidGenerator(format!(
                "student_t degrees of freedom must be positive and finite, got {nu}"
            )));
        }
        let kind = if nu == 1.0 { GeneratorKind::Cauchy } else { GeneratorKind::StudentT(nu) };
        Self::build(kind, Kernel::StudentT { nu }, nu)
    }

    pub fn cauchy() -> Self {
        Self::student_t(1.0).expect("the Cauchy kernel is normalizable")
    }

    /// A user-supplied kernel `g` on `x <= 0` with CDF tail index `tail_index`
    /// (`f64::INFINITY` for super-polynomial tails).
    pub fn custom<F>(name: impl Into<String>, g: F, tail_index: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let name = name.into();
        if tail_index.is_nan() || tail_index <= 0.0 {
            return Err(Error::NonNormalizable(format!("{name}: tail index {tail_index} must be positive")));
        }
        check_kernel_shape(&name, &g)?;
        Self::build(GeneratorKind::Custom(name), Kernel::Custom(Arc::new(g)), tail_index)
    }

    fn build(kind: GeneratorKind, kernel: Kernel, tail_index: f64) -> Result<Self> {
        let mut generator = Self { kind, kernel, tail_index, constant: f64::NAN };
        generator.constant = normalizing_constant(&generator)?;
        Ok(generator)
    }

    pub fn kind(&self) -> &GeneratorKind {
        &self.kind
    }

    pub fn is_normal(&self) -> bool {
        matches!(self.kind, GeneratorKind::Normal)
    }

    /// Decay exponent α of the CDF tails.
    pub fn tail_index(&self) -> f64 {
        self.tail_index
    }

    /// `C` with `∫ C g(-u²/2) du = 1`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// One-dimensional kernel `g(x)`, `x <= 0`.
    pub fn kernel(&self, x: f64) -> f64 {
        self.density_kernel(x, 1)
    }

    /// Density kernel of the `dim`-dimensional member of the family.
    pub fn density_kernel(&self, x: f64, dim: usize) -> f64 {
        match &self.kernel {
            Kernel::Exp => x.exp(),
            Kernel::StudentT { nu } => (1.0 - 2.0 * x / nu).powf(-0.5 * (nu + dim as f64)),
            Kernel::Custom(g) => g(x),
        }
    }

    /// Whether a `dim`-dimensional law with this generator has a density.
    pub fn supports_dimension(&self, dim: usize) -> bool {
        match self.kernel {
            Kernel::Custom(_) => self.tail_index + 1.0 - dim as f64 > 0.0,
            _ => true,
        }
    }

    /// Decay of `r^(dim-1) g_dim(-r²/2)` as `r → ∞`.
    pub(crate) fn radial_decay(&self, dim: usize) -> Decay {
        match self.kernel {
            Kernel::Exp => Decay::Rapid,
            Kernel::StudentT { nu } => Decay::Power(nu + 1.0),
            Kernel::Custom(_) if self.tail_index.is_infinite() => Decay::Rapid,
            Kernel::Custom(_) => Decay::Power(self.tail_index + 2.0 - dim as f64),
        }
    }

    /// Decay of `ψ(u)` in `u`.
    pub(crate) fn pdf_decay(&self) -> Decay {
        self.radial_decay(1)
    }

    /// Decay of `1 - Ψ(u)` in `u`.
    pub(crate) fn survival_decay(&self) -> Decay {
        if self.tail_index.is_infinite() {
            Decay::Rapid
        } else {
            Decay::Power(self.tail_index)
        }
    }

    /// Decay of `g(x)` as `x → -∞`.
    pub(crate) fn kernel_decay(&self) -> Decay {
        if self.tail_index.is_infinite() {
            Decay::Rapid
        } else {
            Decay::Power(0.5 * (self.tail_index + 1.0))
        }
    }

    /// Standardized density `ψ(u) = C g(-u²/2)`.
    pub fn pdf(&self, u: f64) -> f64 {
        self.constant * self.kernel(-0.5 * u * u)
    }

    /// Standardized CDF `Ψ(v)`.
    pub fn cdf(&self, v: f64) -> f64 {
        if v > 0.0 {
            return 1.0 - self.cdf(-v);
        }
        match self.kernel {
            Kernel::Exp => 0.5 * erfc(-v / std::f64::consts::SQRT_2),
            Kernel::StudentT { nu } => 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + v * v)),
            Kernel::Custom(_) => self.lower_tail_by_quadrature(v).unwrap_or(f64::NAN),
        }
    }

    /// `1 - Ψ(v)` without cancellation for large `v`.
    pub fn survival(&self, v: f64) -> f64 {
        self.cdf(-v)
    }

    /// `∫_{-∞}^{v} ψ` for `v <= 0`, by quadrature.
    pub(crate) fn lower_tail_by_quadrature(&self, v: f64) -> Result<f64> {
        quadrature::integrate_to_infinity(|u| self.pdf(u), -v, self.pdf_decay(), Tolerance::default()).map(|e| e.value)
    }

    /// `G(u) = ∫_{-∞}^u C g(x) dx` by quadrature. Requires `u <= 0` and a
    /// tail index above 1.
    pub fn g_integral(&self, u: f64) -> Result<f64> {
        if !(u <= 0.0) {
            return Err(Error::InvalidArgument(format!("G(u) needs u <= 0, got {u}")));
        }
        if !(self.tail_index > 1.0) {
            return Err(Error::Undefined { tail_index: self.tail_index });
        }
        let c = self.constant;
        quadrature::integrate_from_neg_infinity(|x| c * self.kernel(x), u, self.kernel_decay(), Tolerance::default())
            .map(|e| e.value)
    }

    /// Generator of one-dimensional projections of a `dim`-dimensional law.
    pub fn marginal(&self, dim: usize) -> Result<Generator> {
        let g = match (&self.kernel, dim) {
            (Kernel::Custom(g), d) if d >= 2 => g.clone(),
            _ => return Ok(self.clone()),
        };
        if !self.supports_dimension(dim) {
            return Err(Error::NonNormalizable(format!("{} in dimension {dim}", self.kind)));
        }
        let power = (dim - 2) as f64;
        let decay =
            if self.tail_index.is_infinite() { Decay::Rapid } else { Decay::Power(self.tail_index + 3.0 - dim as f64) };
        let inner = move |x: f64| {
            quadrature::integrate_to_infinity(
                |rho| rho.powf(power) * g(x - 0.5 * rho * rho),
                0.0,
                decay,
                Tolerance::default(),
            )
            .map(|e| e.value)
            .unwrap_or(f64::NAN)
        };
        let name = match &self.kind {
            GeneratorKind::Custom(name) => format!("{name}|marginal{dim}"),
            other => other.to_string(),
        };
        let tail_index = self.tail_index + 1.0 - dim as f64;
        Self::build(GeneratorKind::Custom(name), Kernel::Custom(Arc::new(inner)), tail_index)
    }
}

/// `C = 1 / ∫ g(-u²/2) du`, by adaptive quadrature with the analytic tail remainder.
pub fn normalizing_constant(generator: &Generator) -> Result<f64> {
    let label = generator.kind.to_string();
    if !(generator.tail_index > 0.0) {
        return Err(Error::NonNormalizable(label));
    }
    let half = quadrature::integrate_to_infinity(
        |u| generator.kernel(-0.5 * u * u),
        0.0,
        generator.pdf_decay(),
        Tolerance::default(),
    )
    .map_err(|e| Error::NonNormalizable(format!("{label}: {e}")))?;
    let total = 2.0 * half.value;
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::NonNormalizable(label));
    }
    Ok(1.0 / total)
}

fn check_kernel_shape<F: Fn(f64) -> f64>(name: &str, g: &F) -> Result<()> {
    let mut previous = f64::INFINITY;
    for i in 0..=200 {
        // x from 0 down to about -1e6
        let x = -(10f64.powf(i as f64 * 0.035) - 1.0);
        let value = g(x);
        // underflow to 0 is allowed away from the origin
        if !(value.is_finite() && value >= 0.0) || (i == 0 && value == 0.0) {
            return Err(Error::InvalidGenerator(format!("{name}: g({x}) = {value} is not positive")));
        }
        if value > previous * (1.0 + 1e-12) {
            return Err(Error::InvalidGenerator(format!(
                "{name}: g must be non-increasing as x -> -inf (g({x}) = {value})"
            )));
        }
        previous = value;
    }
    // g(-u²/2) ~ u^-(α+1): the slope over u in [1e4, 1e5] must leave α > 0
    let (near, far) = (g(-0.5e8), g(-0.5e10));
    if near > 0.0 && far > 0.0 && (near / far).log10() - 1.0 <= 0.0 {
        return Err(Error::NonNormalizable(format!("{name}: g(-u²/2) decays no faster than 1/u")));
    }
    Ok(())
}
