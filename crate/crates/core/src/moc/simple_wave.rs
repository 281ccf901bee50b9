//! Simple waves: all Riemann invariants of family `N` fixed, `R = k`, and
//! the retained variable constant on the straight lines
//! `x = λ^N(v₀(ξ), k) t + ξ`.

use std::sync::Arc;

use rayon::prelude::*;

use super::root::illinois;
use crate::constraints::InvariantChart;
use crate::error::{Error, Result};
use crate::field::{linspace, GridField, SolutionField};
use crate::spectral::decompose;
use crate::system::{HyperbolicSystem, State};

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct SimpleWave {
    pub k: Vec<f64>,
    pub seeds: Vec<f64>,
    /// `λ^N` at each seed.
    pub speeds: Vec<f64>,
    /// `+∞` when `λ^N(ξ)` never decreases.
    pub breaking_time: f64,
    /// Seed at which the steepest compression sits.
    pub breaking_seed: Option<f64>,
    sys: Arc<dyn HyperbolicSystem>,
    chart: Arc<dyn InvariantChart>,
    v0: Profile,
}

impl std::fmt::Debug for SimpleWave {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SimpleWave")
            .field("k", &self.k)
            .field("seeds", &self.seeds.len())
            .field("breaking_time", &self.breaking_time)
            .finish()
    }
}

/// Build the simple wave with invariants `k` and retained profile `v0` on
/// `seed_count` seeds over `xi_range`, and locate its breaking time.
pub fn simple_wave<S, C>(
    sys: S,
    chart: C,
    k: Vec<f64>,
    v0: impl Fn(f64) -> f64 + Send + Sync + 'static,
    xi_range: (f64, f64),
    seed_count: usize,
) -> Result<SimpleWave>
where
    S: HyperbolicSystem + 'static,
    C: InvariantChart + 'static,
{
    if chart.dim() != sys.dim() || k.len() + 1 != sys.dim() {
        return Err(Error::invalid("chart and invariant values do not fit the system"));
    }
    if !(xi_range.0 < xi_range.1) || seed_count < 3 {
        return Err(Error::invalid(
            "simple wave needs an increasing seed range and at least 3 seeds",
        ));
    }
    let mut wave = SimpleWave {
        k,
        seeds: linspace(xi_range.0, xi_range.1, seed_count),
        speeds: Vec::new(),
        breaking_time: f64::INFINITY,
        breaking_seed: None,
        sys: Arc::new(sys),
        chart: Arc::new(chart),
        v0: Arc::new(v0),
    };
    wave.speeds = wave.seeds.par_iter().map(|&xi| wave.speed(xi)).collect::<Result<_>>()?;
    wave.locate_breaking()?;
    Ok(wave)
}

impl SimpleWave {
    pub fn state_at_seed(&self, xi: f64) -> Result<State> {
        self.chart.to_state(&self.k, (self.v0)(xi))
    }

    pub fn speed(&self, xi: f64) -> Result<f64> {
        let u = self.state_at_seed(xi)?;
        Ok(decompose(self.sys.as_ref(), &u)?.lambdas[self.chart.family()])
    }

    pub fn xi_range(&self) -> (f64, f64) {
        (self.seeds[0], self.seeds[self.seeds.len() - 1])
    }

    /// Steepest decrease of `λ^N(ξ)`: central differences on the seeds,
    /// then a golden-section refinement around the worst one.
    fn locate_breaking(&mut self) -> Result<()> {
        let n = self.seeds.len();
        let slope = |k: usize| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(n - 1));
            (self.speeds[b] - self.speeds[a]) / (self.seeds[b] - self.seeds[a])
        };
        let (kmin, dmin) = (0..n).map(|k| (k, slope(k))).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        if dmin >= 0.0 {
            return Ok(());
        }
        let spacing = self.seeds[1] - self.seeds[0];
        let (lo_b, hi_b) = self.xi_range();
        let h = 1e-3 * spacing;
        let deriv = |xi: f64| -> Result<f64> {
            let (a, b) = ((xi - h).max(lo_b), (xi + h).min(hi_b));
            Ok((self.speed(b)? - self.speed(a)?) / (b - a))
        };
        let (mut a, mut b) = (self.seeds[kmin.saturating_sub(1)], self.seeds[(kmin + 1).min(n - 1)]);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (deriv(c)?, deriv(d)?);
        while (b - a).abs() > 1e-10 * (1.0 + a.abs()) {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = deriv(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = deriv(d)?;
            }
        }
        let xi = 0.5 * (a + b);
        let best = deriv(xi)?.min(dmin);
        self.breaking_time = -1.0 / best;
        self.breaking_seed = Some(xi);
        Ok(())
    }

    /// Seed of the line through `(x, t)`.
    pub fn seed_of(&self, x: f64, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::OutsideDomain { x, t });
        }
        if t >= self.breaking_time {
            return Err(Error::PostBreakingQuery {
                t,
                breaking_time: self.breaking_time,
            });
        }
        let pos = |k: usize| self.seeds[k] + self.speeds[k] * t;
        let last = self.seeds.len() - 1;
        if !(pos(0) <= x && x <= pos(last)) {
            return Err(Error::OutsideDomain { x, t });
        }
        let (mut lo, mut hi) = (0, last);
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if pos(mid) <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (ga, gb) = (pos(lo) - x, pos(hi) - x);
        if ga == 0.0 {
            return Ok(self.seeds[lo]);
        }
        if gb == 0.0 {
            return Ok(self.seeds[hi]);
        }
        let g = |xi: f64| -> Result<(f64, ())> { Ok((xi + self.speed(xi)? * t - x, ())) };
        Ok(illinois(g, (self.seeds[lo], ga), (self.seeds[hi], gb), 1e-12 * (1.0 + x.abs()))?.0)
    }

    pub fn grid(&self, xs: &[f64], ts: &[f64]) -> Result<GridField> {
        GridField::sample(self, xs, ts, self.sys.component_names())
    }
}

impl SolutionField for SimpleWave {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn eval(&self, x: f64, t: f64) -> Result<State> {
        self.state_at_seed(self.seed_of(x, t)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BarotropicModel, ForceSpec, PressureLaw};

    fn model() -> BarotropicModel {
        BarotropicModel::new(PressureLaw::polytropic(1.0, 2.0), ForceSpec::None)
    }

    #[test]
    fn constant_profile_never_breaks() {
        let m = model();
        let w = simple_wave(m.clone(), m.chart(1, 1).unwrap(), vec![-1.0], |_| 0.3, (-2.0, 2.0), 64).unwrap();
        assert!(w.breaking_time.is_infinite());
        let u = w.eval(0.1, 0.3).unwrap();
        assert!((u - w.state_at_seed(0.0).unwrap()).amax() < 1e-15);
    }

    #[test]
    fn ramp_breaking_time_matches_dense_sampling() {
        let m = model();
        let chart = m.chart(1, 1).unwrap();
        let v0 = |xi: f64| 0.5 - 0.3 * xi.tanh();
        let w = simple_wave(m.clone(), chart.clone(), vec![-1.0], v0, (-6.0, 6.0), 2048).unwrap();
        // oracle: λ = u + c on R = u − 2√2(√ρ − 1) = −1, sampled 10⁵ times
        let lam = |xi: f64| {
            let u = v0(xi);
            let sq = (u + 1.0) / (2.0 * 2f64.sqrt()) + 1.0;
            u + (2.0 * sq * sq).sqrt()
        };
        let h = 1e-6;
        let dmin = linspace(-6.0, 6.0, 200_001)
            .into_iter()
            .map(|xi| (lam(xi + h) - lam(xi - h)) / (2.0 * h))
            .fold(f64::INFINITY, f64::min);
        let tb = -1.0 / dmin;
        assert!(((w.breaking_time - tb) / tb).abs() < 1e-3, "{} vs {tb}", w.breaking_time);
        let t = 0.9 * tb;
        for x in [3.0, 5.3, 7.0] {
            let u = w.eval(x, t).unwrap();
            assert!((chart.invariants(&u).unwrap()[0] + 1.0).abs() < 1e-12);
            let xi = w.seed_of(x, t).unwrap();
            assert!((xi + lam(xi) * t - x).abs() < 1e-11);
        }
        assert!(matches!(w.eval(0.0, 1.01 * tb), Err(Error::PostBreakingQuery { .. })));
    }
}
