use std::fmt;
use std::sync::Arc;

use nalgebra::{dvector, DMatrix};

use crate::system::State;

pub type FrameSource = Arc<dyn Fn(&State) -> State + Send + Sync>;
pub type FrameJacobian = Arc<dyn Fn(&State) -> DMatrix<f64> + Send + Sync>;

/// The constraint `U_t + s U_x = F(U)` appended to the system.
#[derive(Clone)]
pub struct TravellingFrame {
    pub s: f64,
    pub label: String,
    /// `F ≡ 0`: solutions are classical travelling waves.
    pub exact_tw: bool,
    source: FrameSource,
    jacobian: Option<FrameJacobian>,
}

impl fmt::Debug for TravellingFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TravellingFrame")
            .field("s", &self.s)
            .field("label", &self.label)
            .field("exact_tw", &self.exact_tw)
            .finish()
    }
}

impl TravellingFrame {
    /// `F = 0` in `dim` components.
    pub fn zero(s: f64, dim: usize) -> Self {
        Self {
            s,
            label: "zero".into(),
            exact_tw: true,
            source: Arc::new(move |_| State::zeros(dim)),
            jacobian: Some(Arc::new(move |_| DMatrix::zeros(dim, dim))),
        }
    }

    /// `F = (0, k1 (u − s))` for the barotropic state `(ρ, u)`.
    pub fn barotropic_family(s: f64, k1: f64) -> Self {
        Self {
            s,
            label: format!("barotropic_family(k1={k1})"),
            exact_tw: false,
            source: Arc::new(move |u| dvector![0.0, k1 * (u[1] - s)]),
            jacobian: Some(Arc::new(move |_| DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, k1]))),
        }
    }

    pub fn custom(s: f64, label: impl Into<String>, f: impl Fn(&State) -> State + Send + Sync + 'static) -> Self {
        Self {
            s,
            label: label.into(),
            exact_tw: false,
            source: Arc::new(f),
            jacobian: None,
        }
    }

    pub fn with_jacobian(mut self, j: impl Fn(&State) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(j));
        self
    }

    pub fn source(&self, u: &State) -> State {
        (self.source)(u)
    }

    pub fn source_jacobian(&self, u: &State) -> Option<DMatrix<f64>> {
        self.jacobian.as_ref().map(|j| j(u))
    }
}
