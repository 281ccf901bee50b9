use std::fmt;
use std::sync::Arc;

use gtw_core::{SolutionField, State};

use crate::error::{FvError, Result};

/// How ghost cells are filled.
#[derive(Clone, Default)]
pub enum Boundary {
    /// Copy the nearest interior cell.
    #[default]
    Extrapolate,
    /// Evaluate a known solution at the ghost-cell centre.
    ExactDirichlet(Arc<dyn SolutionField>),
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Extrapolate => f.write_str("Extrapolate"),
            Boundary::ExactDirichlet(_) => f.write_str("ExactDirichlet"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub cells: usize,
    /// Courant number used to pick the step from the current largest speed.
    pub cfl: f64,
    pub t_end: f64,
    pub boundary: Boundary,
    /// Impose this step instead; refused when it breaks the CFL limit.
    pub fixed_dt: Option<f64>,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, cells: usize, t_end: f64) -> Self {
        Self {
            x_min,
            x_max,
            cells,
            cfl: 0.45,
            t_end,
            boundary: Boundary::Extrapolate,
            fixed_dt: None,
        }
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_cells(&self, cells: usize) -> Self {
        Self { cells, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells < 16 {
            return Err(FvError::InvalidGrid(format!("need at least 16 cells, got {}", self.cells)));
        }
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(FvError::InvalidGrid(format!("CFL number {} outside (0, 1)", self.cfl)));
        }
        if !(self.x_min < self.x_max) || !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(FvError::InvalidGrid(
                "x range must be increasing and t_end finite, >= 0".into(),
            ));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(FvError::InvalidGrid(format!("fixed step {dt} must be positive")));
            }
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.cells as f64
    }

    /// Cell centres, `cells` of them.
    pub fn centers(&self) -> Vec<f64> {
        let h = self.dx();
        (0..self.cells).map(|i| self.x_min + (i as f64 + 0.5) * h).collect()
    }

    /// Point values of `field` at the cell centres at time `t`.
    pub fn sample<F: SolutionField + ?Sized>(&self, field: &F, t: f64) -> Result<Vec<State>> {
        self.centers().into_iter().map(|x| Ok(field.eval(x, t)?)).collect()
    }
}
