//! Barotropic Euler equations with a force term:
//!
//! ```text
//! ρ_t + u ρ_x + ρ u_x = 0
//! u_t + u u_x + (c²/ρ) ρ_x = f(ρ, u)
//! ```

use std::fmt;
use std::sync::Arc;

use nalgebra::{dmatrix, dvector, DMatrix};

use crate::constraints::InvariantChart;
use crate::error::{Error, Result};
use crate::models::PressureLaw;
use crate::spectral::SpectralDecomposition;
use crate::system::{HyperbolicSystem, State};

pub const DEFAULT_RHO_MIN: f64 = 1e-10;

/// The free density function `β(ρ)` in the force family.
#[derive(Clone)]
pub enum Beta {
    /// `β = ρ / c(ρ)`; the profile ODE then integrates to an exponential.
    RhoOverC,
    Constant(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::RhoOverC => write!(f, "RhoOverC"),
            Beta::Constant(b) => write!(f, "Constant({b})"),
            Beta::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Beta {
    pub fn eval(&self, rho: f64, c: f64) -> f64 {
        match self {
            Beta::RhoOverC => rho / c,
            Beta::Constant(b) => *b,
            Beta::Custom(g) => g(rho),
        }
    }

    /// `g(ρ) = c β / ρ`, the coefficient of `(u−s)² − c²` in the force.
    fn force_coefficient(&self, rho: f64, c: f64) -> f64 {
        match self {
            Beta::RhoOverC => 1.0,
            _ => c * self.eval(rho, c) / rho,
        }
    }

    fn label(&self) -> String {
        match self {
            Beta::RhoOverC => "rho/c".into(),
            Beta::Constant(b) => format!("{b}"),
            Beta::Custom(_) => "custom".into(),
        }
    }
}

/// Force term `f(ρ, u)` of the momentum equation.
#[derive(Clone)]
pub enum ForceSpec {
    None,
    /// `f = k1 (u−s) + k1 (c β / ρ) ((u−s)² − c²)`, the family compatible
    /// with the frame source `F = (0, k1 (u−s))`.
    GtwFamily {
        k1: f64,
        s: f64,
        beta: Beta,
    },
    Custom {
        label: String,
        f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ForceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForceSpec::None => write!(f, "None"),
            ForceSpec::GtwFamily { k1, s, beta } => f
                .debug_struct("GtwFamily")
                .field("k1", k1)
                .field("s", s)
                .field("beta", beta)
                .finish(),
            ForceSpec::Custom { label, .. } => f.debug_tuple("Custom").field(label).finish(),
        }
    }
}

impl ForceSpec {
    pub fn custom(label: impl Into<String>, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ForceSpec::Custom {
            label: label.into(),
            f: Arc::new(f),
        }
    }

    pub fn label(&self) -> String {
        match self {
            ForceSpec::None => "none".into(),
            ForceSpec::GtwFamily { k1, s, beta } => {
                format!("gtw_family(k1={k1}, s={s}, beta={})", beta.label())
            }
            ForceSpec::Custom { label, .. } => label.clone(),
        }
    }
}

/// Barotropic fluid model; state `(ρ, u)`.
#[derive(Clone, Debug)]
pub struct BarotropicModel {
    pub pressure: PressureLaw,
    pub force: ForceSpec,
    pub rho_min: f64,
}

impl BarotropicModel {
    pub fn new(pressure: PressureLaw, force: ForceSpec) -> Self {
        Self {
            pressure,
            force,
            rho_min: DEFAULT_RHO_MIN,
        }
    }

    /// `p = ρ²` with the force family for `(k1, s) = (0.5, 1)` and `β = ρ/c`.
    pub fn flagship() -> Self {
        Self::new(
            PressureLaw::polytropic(1.0, 2.0),
            ForceSpec::GtwFamily {
                k1: 0.5,
                s: 1.0,
                beta: Beta::RhoOverC,
            },
        )
    }

    pub fn with_force(&self, force: ForceSpec) -> Self {
        Self { force, ..self.clone() }
    }

    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        self.check_density(rho)?;
        self.pressure.sound_speed(rho)
    }

    fn check_density(&self, rho: f64) -> Result<()> {
        if rho > self.rho_min && rho.is_finite() {
            Ok(())
        } else {
            Err(Error::inadmissible(
                &[rho],
                format!("density must satisfy rho > rho_min = {:e}", self.rho_min),
            ))
        }
    }

    pub fn force(&self, rho: f64, u: f64) -> f64 {
        match &self.force {
            ForceSpec::None => 0.0,
            ForceSpec::GtwFamily { k1, s, beta } => {
                let c = self.pressure.dpdrho(rho).sqrt();
                let w = u - s;
                k1 * w + k1 * beta.force_coefficient(rho, c) * (w * w - c * c)
            }
            ForceSpec::Custom { f, .. } => f(rho, u),
        }
    }

    /// `(∂f/∂ρ, ∂f/∂u)` where known in closed form.
    fn force_gradient(&self, rho: f64, u: f64) -> Option<(f64, f64)> {
        match &self.force {
            ForceSpec::None => Some((0.0, 0.0)),
            ForceSpec::GtwFamily { k1, s, beta } => {
                let c = self.pressure.sound_speed(rho).ok()?;
                let dc = self.pressure.sound_speed_derivative(rho).ok()?;
                let w = u - s;
                let (g, dg) = match beta {
                    Beta::RhoOverC => (1.0, 0.0),
                    Beta::Constant(b) => (c * b / rho, b * (dc * rho - c) / (rho * rho)),
                    Beta::Custom(_) => return None,
                };
                let df_du = k1 + 2.0 * k1 * g * w;
                let df_drho = k1 * dg * (w * w - c * c) - 2.0 * k1 * g * c * dc;
                Some((df_drho, df_du))
            }
            ForceSpec::Custom { .. } => None,
        }
    }

    /// Characteristic speeds, left and right eigenvectors in the closed form
    /// `λ = u ∓ c`, `l = ½(1, ∓ρ/c)`, `d = (1, ∓c/ρ)ᵀ`.
    pub fn eigenstructure(&self, rho: f64, u: f64) -> Result<SpectralDecomposition> {
        let c = self.sound_speed(rho)?;
        Ok(SpectralDecomposition {
            lambdas: vec![u - c, u + c],
            right: vec![dvector![1.0, -c / rho], dvector![1.0, c / rho]],
            left: vec![dvector![0.5, -0.5 * rho / c], dvector![0.5, 0.5 * rho / c]],
        })
    }

    /// Riemann-invariant chart of family `family` (0: `u − c`, 1: `u + c`)
    /// keeping component `retained` (0: ρ, 1: u) as the free coordinate.
    pub fn chart(&self, family: usize, retained: usize) -> Result<BarotropicChart> {
        if family > 1 || retained > 1 {
            return Err(Error::invalid("barotropic chart indices must be 0 or 1"));
        }
        Ok(BarotropicChart {
            model: self.clone(),
            family,
            retained,
        })
    }
}

impl HyperbolicSystem for BarotropicModel {
    fn dim(&self) -> usize {
        2
    }

    fn component_names(&self) -> Vec<String> {
        vec!["rho".into(), "u".into()]
    }

    fn check_admissible(&self, u: &State) -> Result<()> {
        if u.len() != 2 {
            return Err(Error::invalid(format!(
                "barotropic state needs 2 components, got {}",
                u.len()
            )));
        }
        if !u[1].is_finite() {
            return Err(Error::inadmissible(u.as_slice(), "velocity is not finite"));
        }
        self.check_density(u[0])
            .map_err(|_| Error::inadmissible(u.as_slice(), format!("rho > rho_min = {:e} violated", self.rho_min)))?;
        self.pressure.sound_speed(u[0]).map(|_| ()).map_err(|e| match e {
            Error::Inadmissible { reason, .. } => Error::inadmissible(u.as_slice(), reason),
            other => other,
        })
    }

    fn matrix(&self, s: &State) -> DMatrix<f64> {
        let (rho, u) = (s[0], s[1]);
        let c2 = self.pressure.dpdrho(rho);
        dmatrix![u, rho; c2 / rho, u]
    }

    fn source(&self, s: &State) -> State {
        dvector![0.0, self.force(s[0], s[1])]
    }

    fn matrix_jacobian(&self, s: &State) -> Option<Vec<DMatrix<f64>>> {
        let rho = s[0];
        let c = self.pressure.sound_speed(rho).ok()?;
        let dc = self.pressure.sound_speed_derivative(rho).ok()?;
        // d(c²/ρ)/dρ = (2 c c' ρ − c²)/ρ²
        let d21 = (2.0 * c * dc * rho - c * c) / (rho * rho);
        Some(vec![dmatrix![0.0, 1.0; d21, 0.0], DMatrix::identity(2, 2)])
    }

    fn source_jacobian(&self, s: &State) -> Option<DMatrix<f64>> {
        let (df_drho, df_du) = self.force_gradient(s[0], s[1])?;
        Some(dmatrix![0.0, 0.0; df_drho, df_du])
    }

    fn analytic_eigen(&self, s: &State) -> Option<SpectralDecomposition> {
        self.eigenstructure(s[0], s[1]).ok()
    }
}

/// Closed-form Riemann invariant `R = u ∓ Φ(ρ)` of the barotropic model,
/// `Φ(ρ) = ∫_1^ρ c(r)/r dr`, normalized so `R(1, 0) = 0`.
#[derive(Clone, Debug)]
pub struct BarotropicChart {
    model: BarotropicModel,
    family: usize,
    retained: usize,
}

impl BarotropicChart {
    /// +1 for the `u + c` family (`R = u − Φ`), −1 for `u − c` (`R = u + Φ`).
    fn orientation(&self) -> f64 {
        if self.family == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

impl InvariantChart for BarotropicChart {
    fn dim(&self) -> usize {
        2
    }

    fn family(&self) -> usize {
        self.family
    }

    fn retained(&self) -> usize {
        self.retained
    }

    fn invariants(&self, u: &State) -> Result<Vec<f64>> {
        self.model.check_admissible(u)?;
        Ok(vec![u[1] - self.orientation() * self.model.pressure.riemann_integral(u[0])?])
    }

    fn invariant_gradients(&self, u: &State) -> Result<DMatrix<f64>> {
        let c = self.model.sound_speed(u[0])?;
        Ok(dmatrix![-self.orientation() * c / u[0], 1.0])
    }

    fn to_state(&self, r: &[f64], v: f64) -> Result<State> {
        let o = self.orientation();
        let state = if self.retained == 0 {
            dvector![v, r[0] + o * self.model.pressure.riemann_integral(v)?]
        } else {
            let rho = self.model.pressure.inverse_riemann_integral(o * (v - r[0]))?;
            dvector![rho, v]
        };
        self.model.check_admissible(&state)?;
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{decompose, decompose_numeric, DecomposeOptions};
    use nalgebra::DVector;

    #[test]
    fn quadratic_pressure_at_rest() {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 2.0), ForceSpec::None);
        let dec = decompose(&m, &dvector![1.0, 0.0]).unwrap();
        let r2 = 2f64.sqrt();
        assert!((dec.lambdas[0] + r2).abs() < 1e-15 && (dec.lambdas[1] - r2).abs() < 1e-15);
        assert!((&dec.right[0] - dvector![1.0, -r2]).amax() < 1e-15);
        assert!((&dec.right[1] - dvector![1.0, r2]).amax() < 1e-15);
        assert!(dec.biorthonormality_defect() < 1e-15);
    }

    #[test]
    fn isothermal_speeds() {
        let m = BarotropicModel::new(PressureLaw::isothermal(1.0), ForceSpec::None);
        for rho in [0.1, 1.0, 30.0] {
            let dec = decompose(&m, &dvector![rho, 0.4]).unwrap();
            assert!((dec.lambdas[0] - (0.4 - 1.0)).abs() < 1e-15);
            assert!((dec.lambdas[1] - 1.4).abs() < 1e-15);
        }
    }

    #[test]
    fn analytic_matches_numeric() {
        let m = BarotropicModel::flagship();
        let u = dvector![2.0, 1.0];
        let a = decompose(&m, &u).unwrap();
        let n = decompose_numeric(&m, &u, &DecomposeOptions::default()).unwrap();
        assert!(a.distance(&n) < 1e-10);
    }

    #[test]
    fn zero_density_is_rejected() {
        let m = BarotropicModel::flagship();
        let err = decompose(&m, &dvector![0.0, 1.0]).unwrap_err();
        match err {
            Error::Inadmissible { reason, .. } => assert!(reason.contains("rho")),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn analytic_jacobians_match_differences() {
        use crate::gradient::jacobian;
        let m = BarotropicModel::new(
            PressureLaw::polytropic(0.7, 1.4),
            ForceSpec::GtwFamily {
                k1: 0.3,
                s: 0.5,
                beta: Beta::Constant(0.8),
            },
        );
        let u = dvector![1.3, 0.2];
        let jb = m.source_jacobian(&u).unwrap();
        let num = jacobian(&|s: &State| Ok(m.source(s)), &u, 1e-6).unwrap();
        assert!((jb - num).amax() < 1e-8);
        let ja = m.matrix_jacobian(&u).unwrap();
        let num = jacobian(&|s: &State| Ok(DVector::from_column_slice(m.matrix(s).as_slice())), &u, 1e-6).unwrap();
        for (k, dak) in ja.iter().enumerate() {
            let col = num.column(k).into_owned();
            let expect = DVector::from_column_slice(dak.as_slice());
            assert!((col - expect).amax() < 1e-8);
        }
    }

    #[test]
    fn chart_invariant_is_constant_along_right_eigenvector() {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 1.4), ForceSpec::None);
        for family in 0..2 {
            for retained in 0..2 {
                let chart = m.chart(family, retained).unwrap();
                let u = dvector![1.7, 0.3];
                let g = chart.invariant_gradients(&u).unwrap();
                let d = &m.eigenstructure(1.7, 0.3).unwrap().right[family];
                assert!((g.row(0) * d)[0].abs() < 1e-14);
                let r = chart.invariants(&u).unwrap();
                let back = chart.to_state(&r, u[retained]).unwrap();
                assert!((back - &u).amax() < 1e-12);
            }
        }
    }
}
