mod barotropic;
mod closed_form;
mod pressure;
mod scalar;

pub use barotropic::{BarotropicChart, BarotropicModel, Beta, ForceSpec, DEFAULT_RHO_MIN};
pub use closed_form::{ExponentialGtw, GtwClosedForm};
pub use pressure::PressureLaw;
pub use scalar::{scalar_demo, ScalarProfile};
