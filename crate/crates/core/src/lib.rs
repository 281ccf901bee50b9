//! Generalized travelling waves of first-order quasilinear hyperbolic
//! systems `U_t + A(U) U_x = B(U)`, built with differential constraints.

pub mod constraints;
pub mod error;
pub mod field;
pub mod gradient;
pub mod gtw;
pub mod io;
pub mod moc;
pub mod models;
pub mod ode;
pub mod residual;
pub mod spectral;
pub mod system;

pub use error::{Error, Result};
pub use field::{GridField, SolutionField};
pub use system::{GenericSystem, HyperbolicSystem, State};
