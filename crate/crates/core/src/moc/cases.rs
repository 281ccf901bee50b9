//! The two solvable cases in Riemann-invariant form.
//!
//! Case (i): `q = 0`, so `R = R(t)` with `dR/dt = F(R)`, and the retained
//! variable obeys `dx/dt = λ^N(R(t), v)`, `dv/dt = B_j`.
//!
//! Case (ii): `∂R/∂x = G(R)`, `∂R/∂t = F(R)`, with `λ^N` depending on `R`
//! only; along `dx/dt = λ^N(R)` the invariants obey `dR/dt = F + λ^N G` and
//! `dv/dt = [B + Σ_β (λ^N − λ^β) q^β d^β]_j`, `σ q = G`.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;

use super::constrained::MocField;
use super::fan::{seed_interval, CharacteristicFan, CharacteristicFlow, MocOptions, MocWindow};
use crate::constraints::{case_i_function, structural_case_ii, ChartGeometry, InvariantChart, ResidualProbe};
use crate::error::{Error, Result};
use crate::field::linspace;
use crate::ode::{integrate, DenseSolution};
use crate::spectral::decompose;
use crate::system::{HyperbolicSystem, State};

pub type InvariantField = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;

struct CaseIFlow {
    sys: Arc<dyn HyperbolicSystem>,
    chart: Arc<dyn InvariantChart>,
    r: DenseSolution,
    v0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CaseIFlow {
    fn invariants(&self, t: f64) -> Result<Vec<f64>> {
        self.r.eval(t).ok_or(Error::OutsideDomain { x: f64::NAN, t })
    }
}

impl CharacteristicFlow for CaseIFlow {
    fn carried(&self) -> usize {
        1
    }

    fn initial(&self, xi: f64) -> Result<Vec<f64>> {
        Ok(vec![(self.v0)(xi)])
    }

    fn rhs(&self, t: f64, _x: f64, y: &[f64], dy: &mut [f64]) -> Result<f64> {
        let u = self.state(t, y)?;
        dy[0] = self.sys.source(&u)[self.chart.retained()];
        Ok(decompose(self.sys.as_ref(), &u)?.lambdas[self.chart.family()])
    }

    fn state(&self, t: f64, y: &[f64]) -> Result<State> {
        self.chart.to_state(&self.invariants(t)?, y[0])
    }
}

/// Solve case (i) from uniform invariants `r0` and retained profile `v0`.
///
/// `f` is the reduced source `F(R)`; it is checked against
/// `σ l·B` on the initial data before anything is integrated.
pub fn case_i_solve<S, C>(
    sys: S,
    chart: C,
    f: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    r0: Vec<f64>,
    v0: impl Fn(f64) -> f64 + Send + Sync + 'static,
    window: MocWindow,
    opts: &MocOptions,
) -> Result<MocField>
where
    S: HyperbolicSystem + 'static,
    C: InvariantChart + 'static,
{
    window.validate()?;
    if chart.dim() != sys.dim() || r0.len() + 1 != sys.dim() {
        return Err(Error::invalid("chart and invariant values do not fit the system"));
    }
    let sys: Arc<dyn HyperbolicSystem> = Arc::new(sys);
    let chart: Arc<dyn InvariantChart> = Arc::new(chart);

    let mut variation: f64 = 0.0;
    let f0 = f(&r0)?;
    for x in linspace(window.x_min, window.x_max, 17) {
        let u = chart.to_state(&r0, v0(x))?;
        let s = case_i_function(sys.as_ref(), chart.as_ref(), &u)?;
        for (a, b) in s.iter().zip(&f0) {
            variation = variation.max((a - b).abs() / (1.0 + b.abs()));
        }
    }
    if variation > opts.check_tol {
        return Err(Error::StructuralConditionFailed {
            variation,
            tol: opts.check_tol,
        });
    }

    let r = integrate(
        |_, y, dy| {
            dy.copy_from_slice(&f(y)?);
            Ok(())
        },
        0.0,
        &r0,
        window.t_max,
        &opts.ode,
    )?;
    let flow = CaseIFlow {
        sys: sys.clone(),
        chart,
        r,
        v0: Arc::new(v0),
    };
    let range = seed_interval(&window, opts, |x| {
        let u = flow.state(0.0, &[(flow.v0)(x)])?;
        Ok(decompose(sys.as_ref(), &u)?.lambdas[flow.chart.family()])
    })?;
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
    Ok(MocField {
        fan,
        window,
        components: sys.component_names(),
    })
}

struct CaseIIFlow {
    sys: Arc<dyn HyperbolicSystem>,
    chart: Arc<dyn InvariantChart>,
    f: InvariantField,
    g: InvariantField,
    r0: InvariantField,
    v0: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl CharacteristicFlow for CaseIIFlow {
    fn carried(&self) -> usize {
        self.sys.dim()
    }

    fn initial(&self, xi: f64) -> Result<Vec<f64>> {
        let mut y = (self.r0)(&[xi])?;
        y.push((self.v0)(xi));
        Ok(y)
    }

    fn rhs(&self, t: f64, _x: f64, y: &[f64], dy: &mut [f64]) -> Result<f64> {
        let m = y.len() - 1;
        let r = &y[..m];
        let u = self.state(t, y)?;
        let geo = ChartGeometry::at(self.sys.as_ref(), self.chart.as_ref(), &u)?;
        let gv = DVector::from_vec((self.g)(r)?);
        let q = geo
            .sigma
            .clone()
            .lu()
            .solve(&gv)
            .ok_or_else(|| Error::ChartEvaluation("sigma is singular; cannot solve for q".into()))?;
        let n = self.chart.family();
        let speed = geo.dec.lambdas[n];
        for (a, fa) in (self.f)(r)?.into_iter().enumerate() {
            dy[a] = fa + speed * gv[a];
        }
        let mut du = self.sys.source(&u);
        for (a, &beta) in geo.others.iter().enumerate() {
            du += &geo.dec.right[beta] * ((speed - geo.dec.lambdas[beta]) * q[a]);
        }
        dy[m] = du[self.chart.retained()];
        Ok(speed)
    }

    fn state(&self, _t: f64, y: &[f64]) -> Result<State> {
        let m = y.len() - 1;
        self.chart.to_state(&y[..m], y[m])
    }
}

/// Solve case (ii) from invariant data `r0(x)` (passed as a one-element
/// slice) and retained profile `v0(x)`.
///
/// Refused unless, on the initial data, `∂R/∂x = G(R)`, both structural
/// definitions and the bracket condition hold, and `λ^N` does not vary
/// with `v`.
#[allow(clippy::too_many_arguments)]
pub fn case_ii_solve<S, C>(
    sys: S,
    chart: C,
    f: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    g: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    r0: impl Fn(f64) -> Result<Vec<f64>> + Send + Sync + 'static,
    v0: impl Fn(f64) -> f64 + Send + Sync + 'static,
    window: MocWindow,
    opts: &MocOptions,
) -> Result<MocField>
where
    S: HyperbolicSystem + 'static,
    C: InvariantChart + 'static,
{
    window.validate()?;
    if chart.dim() != sys.dim() {
        return Err(Error::invalid("chart does not fit the system"));
    }
    let flow = CaseIIFlow {
        sys: Arc::new(sys),
        chart: Arc::new(chart),
        f: Arc::new(f),
        g: Arc::new(g),
        r0: Arc::new(move |x: &[f64]| r0(x[0])),
        v0: Arc::new(v0),
    };
    let (sys, chart) = (flow.sys.as_ref(), flow.chart.as_ref());
    let n = chart.family();
    let samples = linspace(window.x_min, window.x_max, 17);
    let h = opts.fd_step;

    // ∂R/∂x = G(R) on the data
    let drift: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|&x| {
            let r = (flow.r0)(&[x])?;
            let (rp, rm) = ((flow.r0)(&[x + h])?, (flow.r0)(&[x - h])?);
            let gv = (flow.g)(&r)?;
            let worst = (0..r.len()).fold(0.0f64, |w, a| w.max(((rp[a] - rm[a]) / (2.0 * h) - gv[a]).abs()));
            Ok((x, worst))
        })
        .collect::<Result<_>>()?;
    if let Some(&(x, r)) = drift.iter().max_by(|a, b| a.1.total_cmp(&b.1)) {
        if r > opts.check_tol {
            return Err(Error::InitialDataViolatesConstraints { max_residual: r, x });
        }
    }

    let states: Vec<State> = samples
        .iter()
        .map(|&x| flow.state(0.0, &flow.initial(x)?))
        .collect::<Result<_>>()?;
    let lambda = |r: &[f64], v: f64| -> Result<f64> { Ok(decompose(sys, &chart.to_state(r, v)?)?.lambdas[n]) };
    let mut variation: f64 = 0.0;
    for &x in &samples {
        let y = flow.initial(x)?;
        let (r, v) = (&y[..y.len() - 1], y[y.len() - 1]);
        let dv = 1e-3 * (1.0 + v.abs());
        variation = variation.max(((lambda(r, v + dv)? - lambda(r, v - dv)?) / (2.0 * dv)).abs());
    }
    if variation > opts.check_tol {
        return Err(Error::NotDecoupled { variation });
    }
    let report = structural_case_ii(sys, chart, &*flow.f, &*flow.g, &states, &ResidualProbe::default())?;
    if report.max() > opts.check_tol {
        return Err(Error::StructuralConditionFailed {
            variation: report.max(),
            tol: opts.check_tol,
        });
    }

    let range = seed_interval(&window, opts, |x| {
        let y = flow.initial(x)?;
        lambda(&y[..y.len() - 1], y[y.len() - 1])
    })?;
    let components = sys.component_names();
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
