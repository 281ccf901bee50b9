//! `N−1` constraints `l^i·U_x = q^i` turn the system into an ODE along the
//! characteristics of the free family `N`:
//!
//! ```text
//! dx/dt = λ^N,   dU/dt = B + Σ_{i≠N} (λ^N − λ^i) q^i d^i.
//! ```

use std::sync::Arc;

use rayon::prelude::*;

use super::fan::{seed_interval, CharacteristicFan, CharacteristicFlow, MocOptions, MocWindow};
use crate::constraints::{initial_data_residual, involutiveness_residual, ConstraintSet, ResidualProbe};
use crate::error::{Error, Result};
use crate::field::{linspace, GridField, SolutionField};
use crate::spectral::decompose;
use crate::system::{HyperbolicSystem, State};

pub type InitialData = Arc<dyn Fn(f64) -> Result<State> + Send + Sync>;

/// A solution carried by a characteristic fan.
#[derive(Debug, Clone)]
pub struct MocField {
    pub fan: CharacteristicFan,
    pub window: MocWindow,
    pub components: Vec<String>,
}

impl MocField {
    /// Sample on the window grid; every node is an exact root solve on the fan.
    pub fn grid(&self) -> Result<GridField> {
        GridField::sample(self, &self.window.xs(), &self.window.ts(), self.components.clone())
    }
}

impl SolutionField for MocField {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn eval(&self, x: f64, t: f64) -> Result<State> {
        self.fan.eval(x, t)
    }
}

struct ConstrainedFlow {
    sys: Arc<dyn HyperbolicSystem>,
    cs: ConstraintSet,
    u0: InitialData,
}

impl CharacteristicFlow for ConstrainedFlow {
    fn carried(&self) -> usize {
        self.sys.dim()
    }

    fn initial(&self, xi: f64) -> Result<Vec<f64>> {
        Ok((self.u0)(xi)?.iter().copied().collect())
    }

    fn rhs(&self, t: f64, x: f64, y: &[f64], dy: &mut [f64]) -> Result<f64> {
        let u = State::from_column_slice(y);
        let dec = decompose(self.sys.as_ref(), &u)?;
        let n = self.cs.free_family();
        let speed = dec.lambdas[n];
        let mut du = self.sys.source(&u);
        for (i, q) in self.cs.attached().into_iter().zip(self.cs.eval(x, t, &u)?) {
            du += &dec.right[i] * ((speed - dec.lambdas[i]) * q);
        }
        dy.copy_from_slice(du.as_slice());
        Ok(speed)
    }

    fn state(&self, _t: f64, y: &[f64]) -> Result<State> {
        Ok(State::from_column_slice(y))
    }
}

/// Integrate the constrained system from `U(x, 0) = u0(x)`.
///
/// Before integrating, the initial data are checked against the
/// constraints and the constraints against the system (involution) at 33
/// points of the window; a characteristic crossing before `t_max` aborts.
pub fn integrate_constrained<S>(
    sys: S,
    cs: ConstraintSet,
    u0: impl Fn(f64) -> Result<State> + Send + Sync + 'static,
    window: MocWindow,
    opts: &MocOptions,
) -> Result<MocField>
where
    S: HyperbolicSystem + 'static,
{
    window.validate()?;
    cs.check_dim(sys.dim())?;
    let sys: Arc<dyn HyperbolicSystem> = Arc::new(sys);
    let u0: InitialData = Arc::new(u0);
    let probe = ResidualProbe::default();

    let samples = linspace(window.x_min, window.x_max, 33);
    let checks: Vec<(f64, f64, f64, State)> = samples
        .par_iter()
        .map(|&x| {
            let r = initial_data_residual(sys.as_ref(), &cs, |y| u0(y), x, opts.fd_step)?;
            let u = u0(x)?;
            let inv = involutiveness_residual(sys.as_ref(), &cs, x, 0.0, &u, &probe)?;
            Ok((x, r.iter().fold(0.0f64, |m, v| m.max(v.abs())), inv.max_abs(), u))
        })
        .collect::<Result<_>>()?;
    if let Some((x, r, _, _)) = checks
        .iter()
        .filter(|c| c.1 > opts.check_tol)
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        return Err(Error::InitialDataViolatesConstraints { max_residual: *r, x: *x });
    }
    if let Some((_, _, r, u)) = checks
        .iter()
        .filter(|c| c.2 > opts.check_tol)
        .max_by(|a, b| a.2.total_cmp(&b.2))
    {
        return Err(Error::CompatibilityViolation {
            state: u.iter().copied().collect(),
            residual: *r,
            tol: opts.check_tol,
        });
    }

    let n = cs.free_family();
    let range = seed_interval(&window, opts, |x| Ok(decompose(sys.as_ref(), &u0(x)?)?.lambdas[n]))?;
    let components = sys.component_names();
    let flow = ConstrainedFlow { sys, cs, u0 };
    let fan = CharacteristicFan::build(
        Arc::new(flow),
        linspace(range.0, range.1, opts.seed_count.max(2)),
        window.t_max,
        opts.crossing_checks,
        &opts.ode,
    )?;
    if let Some(time) = fan.crossing {
        return Err(Error::CharacteristicCrossing { time });
    }
    Ok(MocField { fan, window, components })
}

/// Largest `|l^i·U_x − q^i|` over `xs` at each of `ts`, with `U_x` by central
/// differences of step `h` on `field`.
pub fn constraint_drift<S, F>(sys: &S, cs: &ConstraintSet, field: &F, xs: &[f64], ts: &[f64], h: f64) -> Result<Vec<f64>>
where
    S: HyperbolicSystem + ?Sized,
    F: SolutionField + ?Sized,
{
    ts.iter()
        .map(|&t| {
            let mut worst: f64 = 0.0;
            for &x in xs {
                let u = field.eval(x, t)?;
                let ux = (field.eval(x + h, t)? - field.eval(x - h, t)?) / (2.0 * h);
                let dec = decompose(sys, &u)?;
                for (i, q) in cs.attached().into_iter().zip(cs.eval(x, t, &u)?) {
                    worst = worst.max((dec.left[i].dot(&ux) - q).abs());
                }
            }
            Ok(worst)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{scalar_demo, BarotropicModel, ForceSpec, PressureLaw};
    use crate::ode::OdeOptions;
    use crate::system::GenericSystem;
    use nalgebra::dvector;

    fn window(t_max: f64) -> MocWindow {
        MocWindow {
            x_min: -1.0,
            x_max: 1.0,
            t_max,
            nx: 5,
            nt: 3,
        }
    }

    fn few_seeds() -> MocOptions {
        MocOptions {
            seed_count: 129,
            ..MocOptions::default()
        }
    }

    #[test]
    fn constant_state_stays_constant() {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 2.0), ForceSpec::None);
        let cs = ConstraintSet::homogeneous(2, 1).unwrap();
        let sol = integrate_constrained(m, cs, |_| Ok(dvector![1.2, 0.3]), window(1.0), &few_seeds()).unwrap();
        for x in [-1.0, 0.2, 1.0] {
            assert!((sol.eval(x, 1.0).unwrap() - dvector![1.2, 0.3]).amax() < 1e-14);
        }
        let c = 2.4f64.sqrt();
        let k = sol.fan.seeds.len() / 2;
        let x1 = sol.fan.position(k, 1.0);
        assert!((x1 - sol.fan.seeds[k] - (0.3 + c)).abs() < 1e-12);
    }

    #[test]
    fn inconsistent_initial_data_are_refused() {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 2.0), ForceSpec::None);
        let cs = ConstraintSet::homogeneous(2, 1).unwrap();
        // u varies at constant ρ: l¹·U_x = u_x/2·(−ρ/c) ≠ 0
        let err = integrate_constrained(m, cs, |x| Ok(dvector![1.0, 0.1 * x]), window(0.5), &few_seeds()).unwrap_err();
        match err {
            Error::InitialDataViolatesConstraints { max_residual, .. } => assert!(max_residual > 1e-3),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn scalar_travelling_wave_is_reproduced() {
        // u_t + u u_x = −u on data taken from the profile with s = −1
        let a = |u: f64| u;
        let f = |u: f64| -u;
        let tw = scalar_demo(a, f, -1.0, 0.5, (-2.0, 2.0), &OdeOptions::default()).unwrap();
        let tw2 = tw.clone();
        let sys = GenericSystem::scalar(a, f);
        let cs = ConstraintSet::homogeneous(1, 0).unwrap();
        let opts = MocOptions {
            seed_range: Some((-1.5, 1.0)),
            ..few_seeds()
        };
        let w = MocWindow {
            x_min: -0.5,
            x_max: 0.5,
            t_max: 0.4,
            nx: 5,
            nt: 3,
        };
        let sol = integrate_constrained(sys, cs, move |x| tw2.eval(x, 0.0), w, &opts).unwrap();
        for x in [-0.5, 0.0, 0.5] {
            let d = (sol.eval(x, 0.4).unwrap()[0] - tw.eval(x, 0.4).unwrap()[0]).abs();
            assert!(d < 1e-8, "{x}: {d}");
        }
    }

    #[test]
    fn crossing_aborts() {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 2.0), ForceSpec::None);
        let chart = m.chart(1, 1).unwrap();
        let cs = ConstraintSet::homogeneous(2, 1).unwrap();
        use crate::constraints::InvariantChart;
        let u0 = move |x: f64| chart.to_state(&[-0.5], 0.5 - 0.8 * x.tanh() * 2.0);
        let err = integrate_constrained(m, cs, u0, window(5.0), &few_seeds()).unwrap_err();
        assert!(matches!(err, Error::CharacteristicCrossing { .. }), "{err:?}");
    }
}
