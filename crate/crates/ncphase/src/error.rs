use thiserror::Error;

/// Errors produced by phase-space construction, bracket evaluation and
/// time integration.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("particle list is empty")]
    EmptyParticleList,

    #[error("mass must be positive and finite, got {0}")]
    InvalidMass(f64),

    #[error("{name} must be finite, got {value}")]
    NonFiniteInput { name: &'static str, value: f64 },

    #[error("non-finite value at component {index} in {context}")]
    NonFiniteValue { context: &'static str, index: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("phase vector length {0} is not a positive multiple of 4")]
    BadPhaseVectorLength(usize),

    #[error("singular noncommutativity parameters: 1 - eta*theta = {0}")]
    SingularParameters(f64),

    #[error("implicit midpoint stage did not converge within {max_iterations} iterations at step {step}")]
    ImplicitSolveFailed { step: usize, max_iterations: usize },

    #[error("invalid integration setup: {0}")]
    InvalidIntegration(&'static str),

    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
