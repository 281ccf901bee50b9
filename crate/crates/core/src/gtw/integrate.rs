//! Construction of `U(x, t)` from `U_x = P(U)`, `U_t = F(U) − s P(U)`:
//! an x-profile at `t = 0` through the anchor, then one t-line per grid node.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::compat::gtw_compat_residual_with;
use super::frame::TravellingFrame;
use super::pi::{pi_coefficients_with, PiOptions};
use crate::constraints::ResidualProbe;
use crate::error::{Error, Result};
use crate::field::{linspace, GridField, SolutionField};
use crate::ode::{integrate, DenseSolution, OdeOptions};
use crate::system::{HyperbolicSystem, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GtwWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
}

impl GtwWindow {
    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ts(&self) -> Vec<f64> {
        linspace(0.0, self.t_max, self.nt)
    }

    fn validate(&self, x0: f64) -> Result<()> {
        if !(self.x_min < self.x_max) || !(self.t_max >= 0.0) || self.nx < 2 || self.nt < 1 {
            return Err(Error::invalid(format!("malformed window {self:?}")));
        }
        if !(self.x_min <= x0 && x0 <= self.x_max) {
            return Err(Error::invalid(format!(
                "anchor x0 = {x0} outside [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GtwOptions {
    pub ode: OdeOptions,
    /// Largest accepted compatibility residual along the path.
    pub compat_tol: f64,
    /// Check compatibility at every `check_stride`-th node of each line
    /// (`0` disables the check).
    pub check_stride: usize,
    pub probe: ResidualProbe,
    pub pi: PiOptions,
}

impl Default for GtwOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            compat_tol: 1e-5,
            check_stride: 10,
            probe: ResidualProbe::default(),
            pi: PiOptions::default(),
        }
    }
}

/// The constructed solution: profile and t-lines with dense output.
#[derive(Clone)]
pub struct GtwSolution {
    pub frame: TravellingFrame,
    pub anchor: State,
    pub x0: f64,
    pub window: GtwWindow,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    /// Largest compatibility residual met during the checks.
    pub max_compat_residual: f64,
    sys: Arc<dyn HyperbolicSystem>,
    opts: GtwOptions,
    right: DenseSolution,
    left: DenseSolution,
    lines: Vec<DenseSolution>,
}

impl std::fmt::Debug for GtwSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GtwSolution")
            .field("frame", &self.frame)
            .field("anchor", &self.anchor.as_slice())
            .field("x0", &self.x0)
            .field("window", &self.window)
            .finish_non_exhaustive()
    }
}

fn to_state(y: &[f64]) -> State {
    State::from_column_slice(y)
}

/// Turn inadmissible states met during integration into a blow-up at `at`.
fn blowup(at: f64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Inadmissible { reason, .. } => Error::ProfileBlowup { at, reason },
        other => other,
    }
}

struct Fields<'a> {
    sys: &'a dyn HyperbolicSystem,
    frame: &'a TravellingFrame,
    pi: PiOptions,
}

impl Fields<'_> {
    fn x_rhs(&self, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let u = to_state(y);
        let p = pi_coefficients_with(self.sys, self.frame, &u, &self.pi)?;
        dy.copy_from_slice(p.ux().as_slice());
        Ok(())
    }

    fn t_rhs(&self, y: &[f64], dy: &mut [f64]) -> Result<()> {
        let u = to_state(y);
        let p = pi_coefficients_with(self.sys, self.frame, &u, &self.pi)?;
        dy.copy_from_slice(p.ut(self.frame, &u).as_slice());
        Ok(())
    }

    fn x_line(&self, x0: f64, u0: &[f64], x1: f64, opts: &OdeOptions) -> Result<DenseSolution> {
        integrate(|_, y, dy| self.x_rhs(y, dy), x0, u0, x1, opts).map_err(blowup(x1))
    }

    fn t_line(&self, u0: &[f64], t1: f64, opts: &OdeOptions) -> Result<DenseSolution> {
        integrate(|_, y, dy| self.t_rhs(y, dy), 0.0, u0, t1, opts).map_err(blowup(t1))
    }
}

/// Integrate the reduced system from `U(x0, 0) = anchor` over `window`.
pub fn integrate_gtw<S: HyperbolicSystem + 'static>(
    sys: S,
    frame: &TravellingFrame,
    anchor: &State,
    x0: f64,
    window: GtwWindow,
    opts: &GtwOptions,
) -> Result<GtwSolution> {
    window.validate(x0)?;
    if anchor.len() != sys.dim() {
        return Err(Error::invalid("anchor dimension does not match the system"));
    }
    let sys: Arc<dyn HyperbolicSystem> = Arc::new(sys);
    let fields = Fields {
        sys: sys.as_ref(),
        frame,
        pi: opts.pi,
    };
    // fail early, with the anchor as location, on a sonic anchor
    pi_coefficients_with(sys.as_ref(), frame, anchor, &opts.pi)?;

    let right = fields.x_line(x0, anchor.as_slice(), window.x_max, &opts.ode)?;
    let left = fields.x_line(x0, anchor.as_slice(), window.x_min, &opts.ode)?;
    let xs = window.xs();
    let ts = window.ts();
    let profile = |x: f64| -> Result<Vec<f64>> {
        let sol = if x >= x0 { &right } else { &left };
        sol.eval(x).ok_or(Error::OutsideDomain { x, t: 0.0 })
    };
    let starts: Vec<Vec<f64>> = xs.iter().map(|&x| profile(x)).collect::<Result<_>>()?;
    let lines: Vec<DenseSolution> = starts
        .par_iter()
        .map(|u0| fields.t_line(u0, window.t_max, &opts.ode))
        .collect::<Result<_>>()?;

    let mut sol = GtwSolution {
        frame: frame.clone(),
        anchor: anchor.clone(),
        x0,
        window,
        xs,
        ts,
        max_compat_residual: 0.0,
        sys,
        opts: *opts,
        right,
        left,
        lines,
    };
    if opts.check_stride > 0 {
        sol.max_compat_residual = sol.check_compatibility()?;
    }
    Ok(sol)
}

impl GtwSolution {
    pub fn system(&self) -> &dyn HyperbolicSystem {
        self.sys.as_ref()
    }

    fn fields(&self) -> Fields<'_> {
        Fields {
            sys: self.sys.as_ref(),
            frame: &self.frame,
            pi: self.opts.pi,
        }
    }

    /// Compatibility residual at every `check_stride`-th grid node in x and
    /// t; fails on the first state above `compat_tol`.
    fn check_compatibility(&self) -> Result<f64> {
        let stride = self.opts.check_stride;
        let mut nodes: Vec<(usize, usize)> = Vec::new();
        let last_x = self.xs.len() - 1;
        let last_t = self.ts.len() - 1;
        for ix in (0..=last_x).step_by(stride).chain(std::iter::once(last_x)) {
            for it in (0..=last_t).step_by(stride).chain(std::iter::once(last_t)) {
                nodes.push((ix, it));
            }
        }
        nodes.dedup();
        let worst: Vec<(f64, State)> = nodes
            .par_iter()
            .map(|&(ix, it)| {
                let u = self.node(ix, it)?;
                let r = gtw_compat_residual_with(self.sys.as_ref(), &self.frame, &u, &self.opts.probe, &self.opts.pi)?;
                Ok((r.max_abs(), u))
            })
            .collect::<Result<_>>()?;
        let mut max: f64 = 0.0;
        for (r, u) in worst {
            if r > self.opts.compat_tol || r.is_nan() {
                return Err(Error::CompatibilityViolation {
                    state: u.iter().copied().collect(),
                    residual: r,
                    tol: self.opts.compat_tol,
                });
            }
            max = max.max(r);
        }
        Ok(max)
    }

    /// State at grid node `(xs[ix], ts[it])`.
    pub fn node(&self, ix: usize, it: usize) -> Result<State> {
        let t = self.ts[it];
        self.lines[ix]
            .eval(t)
            .map(|v| to_state(&v))
            .ok_or(Error::OutsideDomain { x: self.xs[ix], t })
    }

    /// `U(x, 0)` from the dense x-profile.
    pub fn profile(&self, x: f64) -> Result<State> {
        let sol = if x >= self.x0 { &self.right } else { &self.left };
        sol.eval(x).map(|v| to_state(&v)).ok_or(Error::OutsideDomain { x, t: 0.0 })
    }

    fn inside(&self, x: f64, t: f64) -> Result<()> {
        let w = &self.window;
        let slack = 1e-12 * (1.0 + w.x_max.abs().max(w.x_min.abs()));
        if x < w.x_min - slack || x > w.x_max + slack || t < -1e-15 || t > w.t_max * (1.0 + 1e-12) + 1e-15 {
            return Err(Error::OutsideDomain { x, t });
        }
        Ok(())
    }

    /// Integrate the t-line through `(x, 0)` on the fly.
    fn eval_off_grid(&self, x: f64, t: f64) -> Result<State> {
        let u0 = self.profile(x)?;
        let line = self.fields().t_line(u0.as_slice(), t, &self.opts.ode)?;
        Ok(to_state(line.final_state()))
    }

    /// `|U_xt-route − U_tx-route|_∞` at `(x, t)`: x-profile then t-line,
    /// against the t-line through the anchor then an x-line at time `t`.
    pub fn path_independence(&self, x: f64, t: f64) -> Result<f64> {
        self.inside(x, t)?;
        let fields = self.fields();
        let a = self.eval_off_grid(x, t)?;
        let up = fields.t_line(self.anchor.as_slice(), t, &self.opts.ode)?;
        let b = fields.x_line(self.x0, up.final_state(), x, &self.opts.ode)?;
        Ok((a - to_state(b.final_state())).amax())
    }

    /// `max |U(x, t) − U(x − s t, 0)|` over grid nodes with `x − s t` in the window.
    pub fn shift_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (ix, &x) in self.xs.iter().enumerate() {
            for (it, &t) in self.ts.iter().enumerate() {
                let xi = x - self.frame.s * t;
                if xi < self.window.x_min || xi > self.window.x_max {
                    continue;
                }
                worst = worst.max((self.node(ix, it)? - self.profile(xi)?).amax());
            }
        }
        Ok(worst)
    }

    pub fn grid(&self) -> Result<GridField> {
        let nx = self.xs.len();
        let nt = self.ts.len();
        let n = self.sys.dim();
        let mut state = vec![vec![0.0; nx * nt]; n];
        for it in 0..nt {
            for ix in 0..nx {
                let u = self.node(ix, it)?;
                for c in 0..n {
                    state[c][it * nx + ix] = u[c];
                }
            }
        }
        GridField::new(self.xs.clone(), self.ts.clone(), self.sys.component_names(), state)
    }
}

impl SolutionField for GtwSolution {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn eval(&self, x: f64, t: f64) -> Result<State> {
        self.inside(x, t)?;
        let t = t.clamp(0.0, self.window.t_max);
        match self.xs.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(ix) => self.lines[ix]
                .eval(t)
                .map(|v| to_state(&v))
                .ok_or(Error::OutsideDomain { x, t }),
            Err(_) => self.eval_off_grid(x, t),
        }
    }

    /// `U_x = P(U)`, `U_t = F − s P` evaluated on the constructed state.
    fn analytic_derivatives(&self, x: f64, t: f64) -> Option<Result<(State, State)>> {
        let run = || {
            let u = self.eval(x, t)?;
            let p = pi_coefficients_with(self.sys.as_ref(), &self.frame, &u, &self.opts.pi)?;
            Ok((p.ux(), p.ut(&self.frame, &u)))
        };
        Some(run())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BarotropicModel, GtwClosedForm};
    use nalgebra::dvector;

    fn flagship(nx: usize, nt: usize) -> GtwSolution {
        integrate_gtw(
            BarotropicModel::flagship(),
            &TravellingFrame::barotropic_family(1.0, 0.5),
            &dvector![1.0, 1.1],
            0.0,
            GtwWindow {
                x_min: -2.0,
                x_max: 2.0,
                t_max: 1.0,
                nx,
                nt,
            },
            &GtwOptions::default(),
        )
        .unwrap()
    }

    #[test]
    fn matches_closed_form() {
        let sol = flagship(21, 11);
        let exact = GtwClosedForm::flagship();
        for (ix, &x) in sol.xs.iter().enumerate() {
            for (it, &t) in sol.ts.iter().enumerate() {
                let d = (sol.node(ix, it).unwrap() - exact.eval(x, t).unwrap()).amax();
                assert!(d < 1e-8, "({x}, {t}): {d}");
            }
        }
        assert!(sol.max_compat_residual < 1e-6);
        let off = (sol.eval(0.33, 0.71).unwrap() - exact.eval(0.33, 0.71).unwrap()).amax();
        assert!(off < 1e-8);
    }

    #[test]
    fn routes_agree() {
        let sol = flagship(5, 3);
        assert!(sol.path_independence(1.0, 1.0).unwrap() < 1e-8);
        assert!(sol.path_independence(-1.7, 0.3).unwrap() < 1e-8);
    }

    #[test]
    fn anchor_outside_window_is_rejected() {
        let r = integrate_gtw(
            BarotropicModel::flagship(),
            &TravellingFrame::barotropic_family(1.0, 0.5),
            &dvector![1.0, 1.1],
            5.0,
            GtwWindow {
                x_min: -1.0,
                x_max: 1.0,
                t_max: 1.0,
                nx: 3,
                nt: 3,
            },
            &GtwOptions::default(),
        );
        assert!(r.is_err());
    }

    #[test]
    fn incompatible_frame_aborts() {
        let r = integrate_gtw(
            BarotropicModel::flagship(),
            &TravellingFrame::custom(1.0, "perturbed", |u| dvector![0.0, 0.55 * (u[1] - 1.0)]),
            &dvector![1.0, 1.1],
            0.0,
            GtwWindow {
                x_min: -1.0,
                x_max: 1.0,
                t_max: 0.5,
                nx: 11,
                nt: 6,
            },
            &GtwOptions::default(),
        );
        assert!(matches!(r, Err(Error::CompatibilityViolation { .. })), "{r:?}");
    }
}
