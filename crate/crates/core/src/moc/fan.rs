//! A family of characteristics issued from seeds `ξ` on `t = 0`, each
//! carrying a state vector `Y` along `dx/dt = λ(t, x, Y)`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::root::illinois;
use crate::error::{Error, Result};
use crate::field::linspace;
use crate::ode::{integrate, DenseSolution, OdeOptions};
use crate::system::State;

/// What a characteristic carries and how it moves.
pub trait CharacteristicFlow: Send + Sync {
    /// Length of the carried vector `Y`.
    fn carried(&self) -> usize;

    fn initial(&self, xi: f64) -> Result<Vec<f64>>;

    /// Write `dY/dt` into `dy` and return `dx/dt`.
    fn rhs(&self, t: f64, x: f64, y: &[f64], dy: &mut [f64]) -> Result<f64>;

    /// The PDE state represented by `Y` at time `t`.
    fn state(&self, t: f64, y: &[f64]) -> Result<State>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MocWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
}

impl MocWindow {
    pub fn xs(&self) -> Vec<f64> {
        linspace(self.x_min, self.x_max, self.nx)
    }

    pub fn ts(&self) -> Vec<f64> {
        linspace(0.0, self.t_max, self.nt)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.x_min < self.x_max) || !(self.t_max >= 0.0) || self.nx < 2 || self.nt < 1 {
            return Err(Error::invalid(format!("malformed window {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MocOptions {
    pub ode: OdeOptions,
    pub seed_count: usize,
    /// Seed interval on `t = 0`; `None` widens the window by the distance
    /// the fastest initial characteristic covers, twice over.
    pub seed_range: Option<(f64, f64)>,
    /// Number of times at which neighbouring characteristics are compared.
    pub crossing_checks: usize,
    /// Tolerance of the initial-data and compatibility pre-checks.
    pub check_tol: f64,
    /// Difference step used on initial data.
    pub fd_step: f64,
}

impl Default for MocOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            seed_count: 2048,
            seed_range: None,
            crossing_checks: 256,
            check_tol: 1e-6,
            fd_step: 1e-4,
        }
    }
}

/// Stored characteristics, ordered by seed. Trajectory components are
/// `[x, Y...]`.
#[derive(Clone)]
pub struct CharacteristicFan {
    pub seeds: Vec<f64>,
    pub trajectories: Vec<DenseSolution>,
    pub t_max: f64,
    /// Earliest time two stored neighbours meet, if before `t_max`.
    pub crossing: Option<f64>,
    flow: Arc<dyn CharacteristicFlow>,
    ode: OdeOptions,
}

impl std::fmt::Debug for CharacteristicFan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CharacteristicFan")
            .field("seeds", &self.seeds.len())
            .field("t_max", &self.t_max)
            .field("crossing", &self.crossing)
            .finish()
    }
}

fn trace(flow: &dyn CharacteristicFlow, xi: f64, t1: f64, ode: &OdeOptions) -> Result<DenseSolution> {
    let mut y0 = vec![xi];
    y0.extend(flow.initial(xi)?);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<()> {
        dy[0] = flow.rhs(t, y[0], &y[1..], &mut dy[1..])?;
        Ok(())
    };
    integrate(rhs, 0.0, &y0, t1, ode)
}

impl CharacteristicFan {
    pub fn build(
        flow: Arc<dyn CharacteristicFlow>,
        seeds: Vec<f64>,
        t_max: f64,
        checks: usize,
        ode: &OdeOptions,
    ) -> Result<Self> {
        if seeds.len() < 2 || seeds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("seeds must be at least two strictly increasing points"));
        }
        let trajectories: Vec<DenseSolution> = seeds
            .par_iter()
            .map(|&xi| trace(flow.as_ref(), xi, t_max, ode))
            .collect::<Result<_>>()?;
        let mut fan = Self {
            seeds,
            trajectories,
            t_max,
            crossing: None,
            flow,
            ode: *ode,
        };
        fan.crossing = fan.first_crossing(checks.max(1));
        Ok(fan)
    }

    /// `x(t; ξ_k)` from the stored dense output.
    pub fn position(&self, k: usize, t: f64) -> f64 {
        self.trajectories[k].eval(t).map_or(f64::NAN, |y| y[0])
    }

    fn min_gap(&self, t: f64) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        let mut prev = self.position(0, t);
        for k in 1..self.seeds.len() {
            let p = self.position(k, t);
            if p - prev < best.0 || (p - prev).is_nan() {
                best = (p - prev, k - 1);
            }
            prev = p;
        }
        best
    }

    fn first_crossing(&self, checks: usize) -> Option<f64> {
        if self.t_max <= 0.0 {
            return None;
        }
        let times = linspace(0.0, self.t_max, checks + 1);
        for w in times.windows(2) {
            let (gap, _) = self.min_gap(w[1]);
            if gap > 0.0 {
                continue;
            }
            // bisect on the smallest gap between stored neighbours
            let (mut lo, mut hi) = (w[0], w[1]);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.min_gap(mid).0 > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(hi);
        }
        None
    }

    /// Seed `ξ` and carried vector of the characteristic through `(x, t)`.
    pub fn locate(&self, x: f64, t: f64) -> Result<(f64, Vec<f64>)> {
        if !(0.0..=self.t_max).contains(&t) {
            return Err(Error::OutsideDomain { x, t });
        }
        if let Some(tc) = self.crossing {
            if t >= tc {
                return Err(Error::PostBreakingQuery { t, breaking_time: tc });
            }
        }
        if t == 0.0 {
            return Ok((x, self.flow.initial(x)?));
        }
        let last = self.seeds.len() - 1;
        if !(self.position(0, t) <= x && x <= self.position(last, t)) {
            return Err(Error::OutsideDomain { x, t });
        }
        // largest k with x_k(t) <= x
        let (mut lo, mut hi) = (0, last);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.position(mid, t) <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let shoot = |xi: f64| -> Result<(f64, Vec<f64>)> {
            let sol = trace(self.flow.as_ref(), xi, t, &self.ode)?;
            let y = sol.final_state();
            Ok((y[0] - x, y[1..].to_vec()))
        };
        // fresh endpoints; widen if dense output and re-integration disagree
        let (mut a, mut b) = (lo, hi);
        let (mut ga, mut ya) = shoot(self.seeds[a])?;
        let (mut gb, mut yb) = shoot(self.seeds[b])?;
        while ga > 0.0 && a > 0 {
            a -= 1;
            (ga, ya) = shoot(self.seeds[a])?;
        }
        while gb < 0.0 && b < last {
            b += 1;
            (gb, yb) = shoot(self.seeds[b])?;
        }
        if ga == 0.0 {
            return Ok((self.seeds[a], ya));
        }
        if gb == 0.0 {
            return Ok((self.seeds[b], yb));
        }
        if ga > 0.0 || gb < 0.0 {
            return Err(Error::OutsideDomain { x, t });
        }
        illinois(shoot, (self.seeds[a], ga), (self.seeds[b], gb), 1e-12 * (1.0 + x.abs()))
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<State> {
        let (_, y) = self.locate(x, t)?;
        self.flow.state(t, &y)
    }

    pub fn flow(&self) -> &dyn CharacteristicFlow {
        self.flow.as_ref()
    }
}

/// Default seed interval: the window widened on both sides by twice the
/// distance covered at the largest initial speed.
pub(crate) fn seed_interval(window: &MocWindow, opts: &MocOptions, speed: impl Fn(f64) -> Result<f64>) -> Result<(f64, f64)> {
    if let Some(r) = opts.seed_range {
        if !(r.0 < r.1) {
            return Err(Error::invalid("seed range must be increasing"));
        }
        return Ok(r);
    }
    let mut vmax: f64 = 0.0;
    for x in linspace(window.x_min, window.x_max, 65) {
        vmax = vmax.max(speed(x)?.abs());
    }
    let margin = 2.0 * vmax * window.t_max + 0.05 * (window.x_max - window.x_min);
    Ok((window.x_min - margin, window.x_max + margin))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `dx/dt = Y`, `dY/dt = 0`: straight lines `x = ξ + Y₀(ξ) t`.
    struct Burgers;

    impl CharacteristicFlow for Burgers {
        fn carried(&self) -> usize {
            1
        }
        fn initial(&self, xi: f64) -> Result<Vec<f64>> {
            Ok(vec![-xi.tanh()])
        }
        fn rhs(&self, _t: f64, _x: f64, y: &[f64], dy: &mut [f64]) -> Result<f64> {
            dy[0] = 0.0;
            Ok(y[0])
        }
        fn state(&self, _t: f64, y: &[f64]) -> Result<State> {
            Ok(State::from_column_slice(y))
        }
    }

    #[test]
    fn burgers_crossing_time_and_root() {
        // min of d/dξ(−tanh ξ) is −1 at ξ = 0, so lines meet at t = 1
        let fan =
            CharacteristicFan::build(Arc::new(Burgers), linspace(-3.0, 3.0, 601), 2.0, 400, &OdeOptions::default()).unwrap();
        let tc = fan.crossing.unwrap();
        assert!((tc - 1.0).abs() < 1e-3, "{tc}");
        let (xi, y) = fan.locate(0.4, 0.5).unwrap();
        assert!((xi - xi.tanh() * 0.5 - 0.4).abs() < 1e-11);
        assert!((y[0] + xi.tanh()).abs() < 1e-14);
        assert!(matches!(fan.locate(0.0, 1.5), Err(Error::PostBreakingQuery { .. })));
        assert!(matches!(fan.locate(10.0, 0.5), Err(Error::OutsideDomain { .. })));
    }
}
