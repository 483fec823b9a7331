use crate::elliptical::Generator;
use crate::error::{Error, Result};

/// One-dimensional elliptical law: location, scale and generator.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateLaw {
    mu: f64,
    sigma: f64,
    generator: Generator,
}

impl UnivariateLaw {
    pub fn new(mu: f64, sigma: f64, generator: Generator) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("location must be finite, got {mu}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive, got {sigma}")));
        }
        Ok(Self { mu, sigma, generator })
    }

    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Self::new(mu, sigma, Generator::normal())
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn generator(&self) -> &Generator {
        &self.generator
    }

    pub fn standardize(&self, r: f64) -> f64 {
        (r - self.mu) / self.sigma
    }

    pub fn pdf(&self, r: f64) -> f64 {
        self.generator.pdf(self.standardize(r)) / self.sigma
    }

    /// `F(r)`.
    pub fn cdf(&self, r: f64) -> f64 {
        self.generator.cdf(self.standardize(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_positive_scale() {
        assert!(UnivariateLaw::normal(0.0, 0.0).is_err());
        assert!(UnivariateLaw::normal(0.0, -1.0).is_err());
        assert!(UnivariateLaw::normal(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn location_scale() {
        let law = UnivariateLaw::normal(0.05, 0.1).unwrap();
        assert!((law.cdf(0.05) - 0.5).abs() < 1e-16);
        let peak = 1.0 / (0.1 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((law.pdf(0.05) - peak).abs() < 1e-12);
    }
}
