//! Omega ratio for normal and elliptical return laws.
//!
//! Closed forms are checked against adaptive quadrature of the defining
//! integrals, and multivariate models against Monte-Carlo draws from their
//! stochastic representation.

// `!(x > 0.0)` guards are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Tabulated nodes and frozen reference values keep every printed digit.
#![allow(clippy::excessive_precision)]
// Matrix loops read best with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod elliptical;
pub mod error;
pub mod format;
pub mod omega;
pub mod portfolio;
pub mod quadrature;
pub mod stats;

pub use elliptical::{EllipticalModel, Generator, UnivariateLaw};
pub use error::{Error, Result};
pub use omega::{OmegaValue, ReturnSeries, SharpeLevel, Threshold};
pub use portfolio::{PortfolioSpec, TargetVolatility};
