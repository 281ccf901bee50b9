use thiserror::Error;

pub type Result<T, E = FvError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FvError {
    #[error("time step {dt:e} gives Courant number {courant} > 1 at step {step}")]
    CflViolation { step: usize, dt: f64, courant: f64 },

    #[error("cell {cell} (x = {x}) left the admissible set at t = {time}: {reason}")]
    AdmissibilityLoss { time: f64, cell: usize, x: f64, reason: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error(transparent)]
    Core(#[from] gtw_core::Error),
}
