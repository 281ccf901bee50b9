//! Method-of-characteristics solvers for the reduced systems.

mod cases;
mod constrained;
mod fan;
mod root;
mod simple_wave;

pub use cases::{case_i_solve, case_ii_solve, InvariantField};
pub use constrained::{constraint_drift, integrate_constrained, InitialData, MocField};
pub use fan::{CharacteristicFan, CharacteristicFlow, MocOptions, MocWindow};
pub use simple_wave::{simple_wave, Profile, SimpleWave};
