//! The quasilinear system `U_t + A(U) U_x = B(U)`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;

/// A point in state space.
pub type State = DVector<f64>;

/// A first-order quasilinear system `U_t + A(U) U_x = B(U)` in one space dimension.
///
/// Only `dim`, `matrix` and `source` are required. Models that know their
/// eigenstructure or Jacobians in closed form override the optional hooks;
/// everything else falls back to numerics.
pub trait HyperbolicSystem: Send + Sync {
    fn dim(&self) -> usize;

    fn component_names(&self) -> Vec<String> {
        (0..self.dim()).map(|i| format!("u{i}")).collect()
    }

    /// Admissibility predicate (e.g. positive density).
    fn check_admissible(&self, _u: &State) -> Result<()> {
        Ok(())
    }

    fn matrix(&self, u: &State) -> DMatrix<f64>;

    fn source(&self, u: &State) -> State;

    /// `∂A/∂u_k` for every k, if known analytically.
    fn matrix_jacobian(&self, _u: &State) -> Option<Vec<DMatrix<f64>>> {
        None
    }

    /// `∂B_i/∂u_k`, if known analytically.
    fn source_jacobian(&self, _u: &State) -> Option<DMatrix<f64>> {
        None
    }

    /// Closed-form eigenstructure. Overrides the numeric eigensolver when present.
    fn analytic_eigen(&self, _u: &State) -> Option<SpectralDecomposition> {
        None
    }
}

impl<T: HyperbolicSystem + ?Sized> HyperbolicSystem for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn component_names(&self) -> Vec<String> {
        (**self).component_names()
    }
    fn check_admissible(&self, u: &State) -> Result<()> {
        (**self).check_admissible(u)
    }
    fn matrix(&self, u: &State) -> DMatrix<f64> {
        (**self).matrix(u)
    }
    fn source(&self, u: &State) -> State {
        (**self).source(u)
    }
    fn matrix_jacobian(&self, u: &State) -> Option<Vec<DMatrix<f64>>> {
        (**self).matrix_jacobian(u)
    }
    fn source_jacobian(&self, u: &State) -> Option<DMatrix<f64>> {
        (**self).source_jacobian(u)
    }
    fn analytic_eigen(&self, u: &State) -> Option<SpectralDecomposition> {
        (**self).analytic_eigen(u)
    }
}

impl<T: HyperbolicSystem + ?Sized> HyperbolicSystem for Arc<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn component_names(&self) -> Vec<String> {
        (**self).component_names()
    }
    fn check_admissible(&self, u: &State) -> Result<()> {
        (**self).check_admissible(u)
    }
    fn matrix(&self, u: &State) -> DMatrix<f64> {
        (**self).matrix(u)
    }
    fn source(&self, u: &State) -> State {
        (**self).source(u)
    }
    fn matrix_jacobian(&self, u: &State) -> Option<Vec<DMatrix<f64>>> {
        (**self).matrix_jacobian(u)
    }
    fn source_jacobian(&self, u: &State) -> Option<DMatrix<f64>> {
        (**self).source_jacobian(u)
    }
    fn analytic_eigen(&self, u: &State) -> Option<SpectralDecomposition> {
        (**self).analytic_eigen(u)
    }
}

type MatrixFn = dyn Fn(&State) -> DMatrix<f64> + Send + Sync;
type VectorFn = dyn Fn(&State) -> State + Send + Sync;
type AdmissibleFn = dyn Fn(&State) -> std::result::Result<(), String> + Send + Sync;

/// A system assembled from closures. Used for user-defined models and tests.
#[derive(Clone)]
pub struct GenericSystem {
    names: Vec<String>,
    matrix: Arc<MatrixFn>,
    source: Arc<VectorFn>,
    admissible: Option<Arc<AdmissibleFn>>,
}

impl GenericSystem {
    pub fn new(
        names: Vec<String>,
        matrix: impl Fn(&State) -> DMatrix<f64> + Send + Sync + 'static,
        source: impl Fn(&State) -> State + Send + Sync + 'static,
    ) -> Self {
        Self {
            names,
            matrix: Arc::new(matrix),
            source: Arc::new(source),
            admissible: None,
        }
    }

    pub fn with_admissible(mut self, pred: impl Fn(&State) -> std::result::Result<(), String> + Send + Sync + 'static) -> Self {
        self.admissible = Some(Arc::new(pred));
        self
    }

    /// Constant diagonal matrix with the given source.
    pub fn diagonal(speeds: Vec<f64>, source: impl Fn(&State) -> State + Send + Sync + 'static) -> Self {
        let n = speeds.len();
        let names = (0..n).map(|i| format!("u{i}")).collect();
        let diag = DMatrix::from_diagonal(&DVector::from_vec(speeds));
        Self::new(names, move |_| diag.clone(), source)
    }

    /// Scalar law `u_t + a(u) u_x = f(u)`.
    pub fn scalar(a: impl Fn(f64) -> f64 + Send + Sync + 'static, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(
            vec!["u".into()],
            move |u| DMatrix::from_element(1, 1, a(u[0])),
            move |u| DVector::from_element(1, f(u[0])),
        )
    }
}

impl fmt::Debug for GenericSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericSystem")
            .field("names", &self.names)
            .finish_non_exhaustive()
    }
}

impl HyperbolicSystem for GenericSystem {
    fn dim(&self) -> usize {
        self.names.len()
    }

    fn component_names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn check_admissible(&self, u: &State) -> Result<()> {
        if u.len() != self.dim() {
            return Err(Error::invalid(format!(
                "state has {} components, system has {}",
                u.len(),
                self.dim()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::inadmissible(u.as_slice(), "non-finite component"));
        }
        match &self.admissible {
            Some(pred) => pred(u).map_err(|r| Error::inadmissible(u.as_slice(), r)),
            None => Ok(()),
        }
    }

    fn matrix(&self, u: &State) -> DMatrix<f64> {
        (self.matrix)(u)
    }

    fn source(&self, u: &State) -> State {
        (self.source)(u)
    }
}
