use thiserror::Error;

pub type Result<T, E = CcError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CcError {
    #[error("singular configuration: particles {i} and {j} at distance {distance:e}")]
    Singular { i: usize, j: usize, distance: f64 },

    #[error("inner product {value} outside the distance domain")]
    Domain { value: f64 },

    #[error("chart violation: {0}")]
    Chart(String),

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("constraint violation: {0}")]
    Constraint(String),

    #[error("gradient of the moment of inertia vanishes; candidate special central configuration")]
    DegenerateInertiaGradient,

    #[error("zero multiplier: special central configurations have no associated rotating family")]
    ZeroMultiplier,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CcError {
    /// Numerical failures (as opposed to bad input) map to a distinct exit status.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            CcError::Singular { .. }
                | CcError::Domain { .. }
                | CcError::Chart(_)
                | CcError::NonConvergence { .. }
                | CcError::Constraint(_)
                | CcError::DegenerateInertiaGradient
                | CcError::ZeroMultiplier
                | CcError::Eigen(_)
        )
    }
}
