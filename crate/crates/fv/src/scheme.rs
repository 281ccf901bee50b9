use gtw_core::{HyperbolicSystem, SolutionField, State};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FvError, Result};
use crate::grid::{Boundary, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// First order: Lax–Friedrichs averaging, centred `A(U)U_x`, source at
    /// the midpoint of the step.
    LaxFriedrichs,
    /// Second order: MacCormack predictor–corrector for transport inside a
    /// Strang split of the source.
    MacCormack,
}

impl Scheme {
    pub fn order(self) -> u32 {
        match self {
            Scheme::LaxFriedrichs => 1,
            Scheme::MacCormack => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    /// `h Σ |e|₁`.
    pub l1: f64,
    /// `(h Σ |e|²)^{1/2}`, summed over components.
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Clone)]
pub struct ReferenceRun {
    pub scheme: Scheme,
    pub spec: GridSpec,
    pub centers: Vec<f64>,
    pub t_end: f64,
    pub steps: usize,
    /// Largest `|λ|` over the grid at the start of every step.
    pub max_speeds: Vec<f64>,
    pub final_state: Vec<State>,
}

impl ReferenceRun {
    pub fn errors<F: SolutionField + ?Sized>(&self, exact: &F) -> Result<ErrorNorms> {
        let h = self.spec.dx();
        let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0f64);
        for (x, u) in self.centers.iter().zip(&self.final_state) {
            let e = u - exact.eval(*x, self.t_end)?;
            l1 += h * e.lp_norm(1);
            l2 += h * e.norm_squared();
            linf = linf.max(e.amax());
        }
        Ok(ErrorNorms { l1, l2: l2.sqrt(), linf })
    }
}

/// Spectral radius of `A(U)`, from nalgebra's eigenvalue routine.
fn spectral_radius<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State) -> f64 {
    sys.matrix(u)
        .complex_eigenvalues()
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()))
}

struct Stepper<'a, S: ?Sized> {
    sys: &'a S,
    spec: &'a GridSpec,
    centers: Vec<f64>,
    h: f64,
}

impl<S: HyperbolicSystem + ?Sized> Stepper<'_, S> {
    /// Interior cells plus one ghost on each side, at time `t`.
    fn with_ghosts(&self, interior: &[State], t: f64) -> Result<Vec<State>> {
        let n = interior.len();
        let (left, right) = match &self.spec.boundary {
            Boundary::Extrapolate => (interior[0].clone(), interior[n - 1].clone()),
            Boundary::ExactDirichlet(f) => (
                f.eval(self.spec.x_min - 0.5 * self.h, t)?,
                f.eval(self.spec.x_max + 0.5 * self.h, t)?,
            ),
        };
        let mut v = Vec::with_capacity(n + 2);
        v.push(left);
        v.extend_from_slice(interior);
        v.push(right);
        Ok(v)
    }

    /// `U' = B(U)` over `dt` by the explicit midpoint rule.
    fn source(&self, u: &State, dt: f64) -> State {
        let mid = u + self.sys.source(u) * (0.5 * dt);
        u + self.sys.source(&mid) * dt
    }

    fn lax_friedrichs(&self, u: &[State], t: f64, dt: f64) -> Result<Vec<State>> {
        let g = self.with_ghosts(u, t)?;
        let r = dt / (2.0 * self.h);
        Ok((1..=u.len())
            .into_par_iter()
            .map(|i| {
                let avg = (&g[i + 1] + &g[i - 1]) * 0.5;
                let transport = self.sys.matrix(&g[i]) * (&g[i + 1] - &g[i - 1]) * r;
                let mid = &g[i] + self.sys.source(&g[i]) * (0.5 * dt);
                avg - transport + self.sys.source(&mid) * dt
            })
            .collect())
    }

    fn maccormack(&self, u: &[State], t: f64, dt: f64) -> Result<Vec<State>> {
        let r = dt / self.h;
        let n = u.len();
        // ghosts are taken at t and pushed through the same half source step
        let g: Vec<State> = self.with_ghosts(u, t)?.par_iter().map(|v| self.source(v, 0.5 * dt)).collect();
        // forward-difference predictor on ghost 0 and the interior
        let star: Vec<State> = (0..=n)
            .into_par_iter()
            .map(|i| &g[i] - self.sys.matrix(&g[i]) * (&g[i + 1] - &g[i]) * r)
            .collect();
        Ok((1..=n)
            .into_par_iter()
            .map(|i| {
                let back = self.sys.matrix(&star[i]) * (&star[i] - &star[i - 1]) * r;
                let v = (&g[i] + &star[i] - back) * 0.5;
                self.source(&v, 0.5 * dt)
            })
            .collect())
    }

    fn check(&self, u: &[State], time: f64) -> Result<()> {
        u.par_iter().enumerate().try_for_each(|(cell, v)| {
            self.sys.check_admissible(v).map_err(|e| FvError::AdmissibilityLoss {
                time,
                cell,
                x: self.centers[cell],
                reason: e.to_string(),
            })?;
            if v.iter().all(|c| c.is_finite()) {
                Ok(())
            } else {
                Err(FvError::AdmissibilityLoss {
                    time,
                    cell,
                    x: self.centers[cell],
                    reason: "non-finite value".into(),
                })
            }
        })
    }
}

/// Step `initial` (point values at the cell centres) to `spec.t_end`.
pub fn advance<S>(sys: &S, initial: &[State], spec: &GridSpec, scheme: Scheme) -> Result<ReferenceRun>
where
    S: HyperbolicSystem + ?Sized,
{
    spec.validate()?;
    if initial.len() != spec.cells {
        return Err(FvError::InvalidGrid(format!(
            "{} initial values for {} cells",
            initial.len(),
            spec.cells
        )));
    }
    let stepper = Stepper {
        sys,
        spec,
        centers: spec.centers(),
        h: spec.dx(),
    };
    stepper.check(initial, 0.0)?;
    let mut u = initial.to_vec();
    let mut t = 0.0;
    let mut max_speeds = Vec::new();
    let mut steps = 0;
    while t < spec.t_end {
        let speed = u.par_iter().map(|v| spectral_radius(sys, v)).reduce(|| 0.0, f64::max);
        if !speed.is_finite() {
            return Err(FvError::AdmissibilityLoss {
                time: t,
                cell: 0,
                x: f64::NAN,
                reason: "non-finite characteristic speed".into(),
            });
        }
        let limit = if speed > 0.0 {
            spec.cfl * stepper.h / speed
        } else {
            f64::INFINITY
        };
        let mut dt = match spec.fixed_dt {
            Some(dt) => {
                let courant = dt * speed / stepper.h;
                if courant > 1.0 {
                    return Err(FvError::CflViolation {
                        step: steps,
                        dt,
                        courant,
                    });
                }
                dt
            }
            None => limit,
        };
        if t + dt >= spec.t_end || !dt.is_finite() {
            dt = spec.t_end - t;
        }
        u = match scheme {
            Scheme::LaxFriedrichs => stepper.lax_friedrichs(&u, t, dt)?,
            Scheme::MacCormack => stepper.maccormack(&u, t, dt)?,
        };
        t = if t + dt >= spec.t_end { spec.t_end } else { t + dt };
        max_speeds.push(speed);
        steps += 1;
        stepper.check(&u, t)?;
    }
    Ok(ReferenceRun {
        scheme,
        spec: spec.clone(),
        centers: stepper.centers,
        t_end: spec.t_end,
        steps,
        max_speeds,
        final_state: u,
    })
}
