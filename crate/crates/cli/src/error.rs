use std::path::PathBuf;

use gtw_core::Error as CoreError;
use gtw_fv::FvError;
use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("config error: {0}")]
    Expr(#[from] ExprError),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error(transparent)]
    Fv(FvError),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("verification failed: {0}")]
    CheckFailed(String),
}

impl From<FvError> for CliError {
    fn from(e: FvError) -> Self {
        match e {
            FvError::Core(c) => CliError::Core(c),
            other => CliError::Fv(other),
        }
    }
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 config/schema, 3 hyperbolicity, 4 sonic/sub-shock, 5 compatibility
    /// or structural condition, 6 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Parse { .. } | CliError::Expr(_) => 2,
            CliError::Core(e) => core_exit_code(e),
            CliError::Fv(FvError::AdmissibilityLoss { .. }) => 3,
            CliError::Fv(FvError::InvalidGrid(_)) => 2,
            CliError::Fv(_) | CliError::Io { .. } | CliError::CheckFailed(_) => 6,
        }
    }

    /// Short machine-readable kind, printed with the message.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Expr(_) => "config",
            CliError::Parse { .. } => "parse",
            CliError::Core(e) => core_kind(e),
            CliError::Fv(FvError::CflViolation { .. }) => "cfl_violation",
            CliError::Fv(FvError::AdmissibilityLoss { .. }) => "admissibility_loss",
            CliError::Fv(_) => "fv",
            CliError::Io { .. } => "io",
            CliError::CheckFailed(_) => "check_failed",
        }
    }
}

fn core_exit_code(e: &CoreError) -> i32 {
    use CoreError::*;
    match e {
        Parse { .. } | InvalidInput(_) => 2,
        Inadmissible { .. } | ComplexEigenvalues { .. } | DegenerateSpeeds { .. } | EigenvectorFailure { .. } => 3,
        SubShock { .. } | SonicPoint { .. } => 4,
        CompatibilityViolation { .. }
        | StructuralConditionFailed { .. }
        | NotDecoupled { .. }
        | InitialDataViolatesConstraints { .. } => 5,
        _ => 6,
    }
}

fn core_kind(e: &CoreError) -> &'static str {
    use CoreError::*;
    match e {
        Inadmissible { .. } => "inadmissible",
        ComplexEigenvalues { .. } => "complex_eigenvalues",
        DegenerateSpeeds { .. } => "degenerate_speeds",
        EigenvectorFailure { .. } => "eigenvector_failure",
        MissingAnalyticJacobian { .. } => "missing_analytic_jacobian",
        Ode { .. } => "ode",
        SonicPoint { .. } => "sonic_point",
        SubShock { .. } => "sub_shock",
        CompatibilityViolation { .. } => "compatibility_violation",
        StructuralConditionFailed { .. } => "structural_condition_failed",
        ProfileBlowup { .. } => "profile_blowup",
        QuadratureFailure(_) => "quadrature_failure",
        ChartEvaluation(_) => "chart_evaluation",
        InitialDataViolatesConstraints { .. } => "initial_data_violates_constraints",
        CharacteristicCrossing { .. } => "characteristic_crossing",
        PostBreakingQuery { .. } => "post_breaking_query",
        NotDecoupled { .. } => "not_decoupled",
        OutsideDomain { .. } => "outside_domain",
        InvalidInput(_) => "invalid_input",
        Parse { .. } => "parse",
    }
}
