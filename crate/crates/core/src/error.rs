use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("state {state:?} is outside the admissible set: {reason}")]
    Inadmissible { state: Vec<f64>, reason: String },

    #[error("matrix has complex eigenvalues at {state:?} (max |imag| = {imag:e})")]
    ComplexEigenvalues { state: Vec<f64>, imag: f64 },

    #[error("characteristic speeds {i} and {j} coincide at {state:?} (gap {gap:e})")]
    DegenerateSpeeds { i: usize, j: usize, gap: f64, state: Vec<f64> },

    #[error("eigenvector computation failed at {state:?}: {reason}")]
    EigenvectorFailure { state: Vec<f64>, reason: String },

    #[error("analytic derivative requested but the model provides none for {what}")]
    MissingAnalyticJacobian { what: &'static str },

    #[error("ODE integration failed at t = {t}: {reason}")]
    Ode { t: f64, reason: String },

    #[error("sonic point a(u) = s reached at u = {value} (gap {gap:e})")]
    SonicPoint { value: f64, gap: f64 },

    #[error("sub-shock singularity in family {family} at {state:?}: lambda - s = {gap:e}, l.(B - F) = {numerator:e}")]
    SubShock {
        family: usize,
        state: Vec<f64>,
        gap: f64,
        numerator: f64,
    },

    #[error("compatibility violated at {state:?}: residual {residual:e} > tolerance {tol:e}")]
    CompatibilityViolation { state: Vec<f64>, residual: f64, tol: f64 },

    #[error("structural condition fails: variation {variation:e} > tolerance {tol:e}")]
    StructuralConditionFailed { variation: f64, tol: f64 },

    #[error("solution left the admissible range at {at}: {reason}")]
    ProfileBlowup { at: f64, reason: String },

    #[error("Riemann-invariant quadrature failed: {0}")]
    QuadratureFailure(String),

    #[error("chart evaluation failed: {0}")]
    ChartEvaluation(String),

    #[error("initial data violate the constraints: max residual {max_residual:e} at x = {x}")]
    InitialDataViolatesConstraints { max_residual: f64, x: f64 },

    #[error("characteristics cross at t = {time} (gradient catastrophe)")]
    CharacteristicCrossing { time: f64 },

    #[error("query at t = {t} is past the breaking time {breaking_time}")]
    PostBreakingQuery { t: f64, breaking_time: f64 },

    #[error("characteristic speed depends on the retained variable (variation {variation:e})")]
    NotDecoupled { variation: f64 },

    #[error("point (x = {x}, t = {t}) is not covered by the computed solution")]
    OutsideDomain { x: f64, t: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub fn inadmissible(state: &[f64], reason: impl Into<String>) -> Self {
        Error::Inadmissible {
            state: state.to_vec(),
            reason: reason.into(),
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
