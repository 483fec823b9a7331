use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("generator `{0}` is not normalizable")]
    NonNormalizable(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("scatter matrix has rank {rank} < dimension {dim}")]
    RankDeficient { rank: usize, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("no radial sampler: {0}")]
    NoRadialSampler(String),

    #[error("omega ratio undefined: tail index {tail_index} <= 1")]
    Undefined { tail_index: f64 },

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("{0} requires a normal generator")]
    GeneratorMismatch(&'static str),

    #[error("omega slope is singular at S = 0")]
    SingularAtZero,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate portfolio scale: w'Σw = {0}")]
    DegenerateScale(f64),

    #[error("no candidate satisfies the target volatility {0}")]
    EmptyFeasibleSet(f64),

    #[error("infeasible target volatility: {0}")]
    InfeasibleTarget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
