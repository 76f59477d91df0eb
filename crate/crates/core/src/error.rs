use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point lies outside chart {chart} (relative modulus {ratio:e})")]
    ChartUndefined { chart: usize, ratio: f64 },

    #[error("chart index {chart} out of range for CP^{n}")]
    InvalidChart { chart: usize, n: usize },

    #[error("homogeneous coordinates must not all vanish")]
    ZeroVector,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Monte Carlo standard error {std_error:e} exceeds 10% of {value:e}")]
    InsufficientSamples { value: f64, std_error: f64 },

    #[error("negative degree {0} has no polynomial basis")]
    NegativeDegree(i64),

    #[error("occupation pattern {0:?} is not an admissible projective oscillator state")]
    InadmissibleState(Vec<u32>),

    #[error("doubling the step count changed the holonomy by {change:e}")]
    StepTooCoarse { change: f64 },

    #[error("kernel {value:e} is numerically zero at the requested point")]
    KernelVanishes { value: f64 },

    #[error("point {0} lies outside the kernel domain")]
    DomainViolation(String),

    #[error("invalid loop: {0}")]
    InvalidLoop(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
