//! Generalized travelling waves: solutions that also satisfy
//! `U_t + s U_x = F(U)`; `F = 0` gives classical travelling waves.

mod compat;
mod frame;
mod integrate;
mod pi;
mod sonic;

pub use compat::{gtw_compat_residual, gtw_compat_residual_with, GtwCompatResidual};
pub use frame::{FrameJacobian, FrameSource, TravellingFrame};
pub use integrate::{integrate_gtw, GtwOptions, GtwSolution, GtwWindow};
pub use pi::{pi_coefficients, pi_coefficients_with, PiCoefficients, PiOptions};
pub use sonic::{detect_sonic_locus, SonicHit, SonicKind};
