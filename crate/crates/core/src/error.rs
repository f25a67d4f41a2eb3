use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SldError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("tilt outside the effective domain: tau2 = {tau2} >= {bound}")]
    DomainViolation { tau2: f64, bound: f64 },
    #[error("quadrature did not converge: achieved relative error {achieved:e}, target {target:e}")]
    QuadratureFailure { achieved: f64, target: f64 },
    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),
    #[error("deviation point not admissible: {0}")]
    NotAdmissible(String),
    #[error("saddle solver hit {iterations} iterations, residual {residual:e}")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("curvature undefined at a zero gradient")]
    ZeroGradient,
    #[error("degenerate tilt tau = 0 (deviation level at the mean)")]
    DegenerateTilt,
    #[error("1 - L_D/L_Lambda = {0:e} is not positive")]
    ComplexKappa(f64),
    #[error("gamma bracket = {0:e} is not positive")]
    NegativeBracket(f64),
    #[error("regime violation: {0}")]
    RegimeViolation(String),
}

impl SldError {
    /// Stable machine-readable code, one per variant.
    pub fn code(&self) -> &'static str {
        match self {
            SldError::InvalidParameter(_) => "invalid_parameter",
            SldError::DomainViolation { .. } => "domain_violation",
            SldError::QuadratureFailure { .. } => "quadrature_failure",
            SldError::NumericalBreakdown(_) => "numerical_breakdown",
            SldError::NotAdmissible(_) => "not_admissible",
            SldError::MaxIterations { .. } => "max_iterations",
            SldError::ZeroGradient => "zero_gradient",
            SldError::DegenerateTilt => "degenerate_tilt",
            SldError::ComplexKappa(_) => "complex_kappa",
            SldError::NegativeBracket(_) => "negative_bracket",
            SldError::RegimeViolation(_) => "regime_violation",
        }
    }

    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            SldError::InvalidParameter(_) | SldError::DomainViolation { .. } => 2,
            SldError::NotAdmissible(_) | SldError::DegenerateTilt => 3,
            SldError::RegimeViolation(_) => 4,
            _ => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, SldError>;

pub(crate) fn invalid(msg: impl Into<String>) -> SldError {
    SldError::InvalidParameter(msg.into())
}
