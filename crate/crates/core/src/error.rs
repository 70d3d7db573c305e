use thiserror::Error;

use crate::transient::StabilityReport;

/// Invalid discretization or run parameters.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("`{field}` must be positive, got {value}")]
    NonPositive { field: String, value: f64 },
    #[error("`{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    pub fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Medium coefficients that violate the standing assumptions of the scheme.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediumError {
    #[error("{name}({position:?}) = {value} is not admissible: {reason}")]
    BadSample {
        name: &'static str,
        position: Vec<f64>,
        value: f64,
        reason: &'static str,
    },
    #[error("inf mu_a/mu_s over the scattering region is {0}; a positive value is required")]
    NoAbsorptionMargin(f64),
    #[error("declared {name} = {declared} disagrees with the grid-sampled value {sampled}")]
    DeclaredMismatch {
        name: &'static str,
        declared: f64,
        sampled: f64,
    },
    #[error("medium has no interior grid points to sample")]
    Empty,
}

/// Phase-function construction or evaluation errors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaseError {
    #[error("anisotropy g = {0} is outside [0, 1)")]
    Anisotropy(f64),
    #[error("Fourier decay ratio r = {0} must satisfy 0 <= r < 1")]
    DecayRatio(f64),
    #[error("Fourier decay constant C = {0} must be positive")]
    DecayConstant(f64),
    #[error("phase table: {0}")]
    Table(String),
    #[error("phase function does not integrate to one: integral = {0}")]
    Normalization(f64),
}

/// Failures of the time-marching and stationary drivers.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Phase(#[from] PhaseError),
    #[error("stability conditions not satisfied: {reason}")]
    StabilityRefused {
        reason: String,
        report: Box<StabilityReport>,
    },
    #[error("non-finite value at step {step}, node {node:?}, direction {direction}")]
    NonFinite {
        step: usize,
        node: Vec<usize>,
        direction: usize,
    },
    #[error("T/dt = {ratio} is not an integer")]
    NonIntegralSteps { ratio: f64 },
    #[error("initial field disagrees with the inflow data at t = 0 (node {node:?}, direction {direction}: {initial} vs {inflow})")]
    Incompatible {
        node: Vec<usize>,
        direction: usize,
        initial: f64,
        inflow: f64,
    },
    #[error("contraction fraction lambda = {0} must lie in [0, 1); refine the angular grid")]
    Contraction(f64),
    #[error("stationary solve requires time-independent {0}")]
    TimeDependent(&'static str),
    #[error("grid has no interior points or no angular quadrature nodes")]
    Degenerate,
    #[error("dense system has {unknowns} unknowns, above the cap of {cap}")]
    TooLarge { unknowns: usize, cap: usize },
    #[error("dense system is singular")]
    Singular,
}
