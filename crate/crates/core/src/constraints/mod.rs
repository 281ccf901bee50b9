//! Differential constraints `l^i · U_x = q^i` and their compatibility
//! conditions, evaluated as residuals.

mod chart;
mod involution;
mod probe;
mod riemann;
mod structural;

pub use chart::{
    chart_defects, coordinate_chart, riemann_chart, validate_chart, ChartGeometry, ClosureChart, InvariantChart, QuadratureChart,
};
pub use involution::{initial_data_residual, involutiveness_residual, ConstraintFn, ConstraintSet, InvolutionResidual};
pub(crate) use probe::EigenDerivative;
pub use probe::ResidualProbe;
pub use riemann::{riemann_compat_residual, RiemannCompatResidual};
pub use structural::{
    case_i_function, case_i_source, case_ii_constraints, lie_bracket_residual, structural_case_i, structural_case_ii,
    CaseIIPoint, CaseIIReport, CaseIReport, CaseIRow,
};
