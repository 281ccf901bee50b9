//! Reference integrator for `U_t + A(U) U_x = B(U)` on a uniform grid.
//!
//! The schemes step the quasilinear (non-conservative) form directly. That
//! is only meaningful for smooth solutions — before breaking and away from
//! sub-shocks — which is all this crate is used for: an oracle that shares
//! no code with the characteristic and ODE constructions.

mod convergence;
mod error;
mod grid;
mod scheme;

pub use convergence::{convergence_study, ConvergenceRow, ConvergenceTable};
pub use error::{FvError, Result};
pub use grid::{Boundary, GridSpec};
pub use scheme::{advance, ErrorNorms, ReferenceRun, Scheme};
