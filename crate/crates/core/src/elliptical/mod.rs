//! Elliptical families: generators, univariate laws, multivariate models and
//! sampling through the stochastic representation.

mod generator;
mod law;
mod model;
mod sampling;

pub use generator::{normalizing_constant, Generator, GeneratorKind, KernelFn};
pub use law::UnivariateLaw;
pub use model::{AxisRange, DensityGrid, EllipticalModel};
pub use sampling::{sample, RadialLaw, RadialTable, SampleBatch};
