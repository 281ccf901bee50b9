//! Explicit Runge–Kutta integration with continuous output.
//!
//! The adaptive integrator is the Dormand–Prince 5(4) pair with its
//! fourth-order continuous extension. The fixed-step fallback is classical
//! RK4 with cubic Hermite interpolation; both store their per-step
//! interpolants in the same form,
//!
//! `y(t0 + θh) = r1 + θ (r2 + (1−θ) (r3 + θ (r4 + (1−θ) r5)))`,
//!
//! so [`DenseSolution`] does not care which stepper produced it.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated when `None`.
    pub first_step: Option<f64>,
    /// Largest allowed step magnitude (`None` = whole interval).
    pub max_step: Option<f64>,
    pub max_steps: usize,
    /// When set, use RK4 with exactly this step (the last step is shortened).
    pub fixed_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            first_step: None,
            max_step: None,
            max_steps: 200_000,
            fixed_step: None,
        }
    }
}

impl OdeOptions {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn fixed(step: f64) -> Self {
        Self {
            fixed_step: Some(step),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone)]
struct Segment {
    t0: f64,
    h: f64,
    r: [Vec<f64>; 5],
}

impl Segment {
    fn eval_into(&self, t: f64, out: &mut [f64]) {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.r[0][i] + theta * (self.r[1][i] + theta1 * (self.r[2][i] + theta * (self.r[3][i] + theta1 * self.r[4][i])));
        }
    }
}

/// Accepted steps of an integration plus their interpolants.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    dim: usize,
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    segments: Vec<Segment>,
    rhs_evaluations: usize,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("at least one node")
    }

    pub fn final_state(&self) -> &[f64] {
        self.states.last().expect("at least one node")
    }

    /// Accepted step nodes (in integration order).
    pub fn nodes(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times.iter().copied().zip(self.states.iter().map(Vec::as_slice))
    }

    pub fn steps(&self) -> usize {
        self.segments.len()
    }

    pub fn rhs_evaluations(&self) -> usize {
        self.rhs_evaluations
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = (self.t_start().min(self.t_end()), self.t_start().max(self.t_end()));
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        t >= a - slack && t <= b + slack
    }

    /// Interpolated state at `t`, or `None` outside the integrated span.
    pub fn eval(&self, t: f64) -> Option<Vec<f64>> {
        if !self.contains(t) {
            return None;
        }
        let mut out = vec![0.0; self.dim];
        if self.segments.is_empty() {
            out.copy_from_slice(&self.states[0]);
            return Some(out);
        }
        let forward = self.t_end() >= self.t_start();
        // segments are ordered along the integration direction
        let idx = self
            .segments
            .partition_point(|s| if forward { s.t0 + s.h < t } else { s.t0 + s.h > t })
            .min(self.segments.len() - 1);
        self.segments[idx].eval_into(t, &mut out);
        Some(out)
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Integrate `y' = f(t, y)` from `t0` to `t1` (either direction).
pub fn integrate<F>(mut rhs: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::invalid("non-finite integration bounds"));
    }
    if y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::Ode {
            t: t0,
            reason: "non-finite initial state".into(),
        });
    }
    match opts.fixed_step {
        Some(h) => rk4_fixed(&mut rhs, t0, y0, t1, h),
        None => dopri5(&mut rhs, t0, y0, t1, opts),
    }
}

fn call<F>(rhs: &mut F, t: f64, y: &[f64], out: &mut [f64], evals: &mut usize) -> Result<()>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    *evals += 1;
    rhs(t, y, out)?;
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::Ode {
            t,
            reason: "right-hand side is not finite".into(),
        });
    }
    Ok(())
}

fn dopri5<F>(rhs: &mut F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut sol = DenseSolution {
        dim: n,
        times: vec![t0],
        states: vec![y0.to_vec()],
        segments: Vec::new(),
        rhs_evaluations: 0,
    };
    if t1 == t0 {
        return Ok(sol);
    }
    let dir = (t1 - t0).signum();
    let span = (t1 - t0).abs();
    let max_step = opts.max_step.unwrap_or(span).min(span);

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) = (
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    );
    let mut ytmp = vec![0.0; n];
    let mut ynew = vec![0.0; n];
    let mut evals = 0usize;
    call(rhs, t, &y, &mut k1, &mut evals)?;

    let mut h = match opts.first_step {
        Some(h) => h.abs().min(max_step),
        None => initial_step(rhs, t, &y, &k1, dir, max_step, opts, &mut evals)?,
    };

    let sc = |a: f64, b: f64| opts.atol + opts.rtol * a.abs().max(b.abs());
    let mut steps = 0usize;
    let mut reject_streak = 0usize;
    loop {
        if steps >= opts.max_steps {
            return Err(Error::Ode {
                t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        let hs = dir * h;
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::Ode {
                t,
                reason: "step size underflow".into(),
            });
        }

        for i in 0..n {
            ytmp[i] = y[i] + hs * A21 * k1[i];
        }
        call(rhs, t + C2 * hs, &ytmp, &mut k2, &mut evals)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A31 * k1[i] + A32 * k2[i]);
        }
        call(rhs, t + C3 * hs, &ytmp, &mut k3, &mut evals)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        call(rhs, t + C4 * hs, &ytmp, &mut k4, &mut evals)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        call(rhs, t + C5 * hs, &ytmp, &mut k5, &mut evals)?;
        for i in 0..n {
            ytmp[i] = y[i] + hs * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        let t_new = if last { t1 } else { t + hs };
        call(rhs, t_new, &ytmp, &mut k6, &mut evals)?;
        for i in 0..n {
            ynew[i] = y[i] + hs * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        call(rhs, t_new, &ynew, &mut k7, &mut evals)?;

        let mut err = 0.0;
        for i in 0..n {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let s = sc(y[i], ynew[i]);
            err += (e / s) * (e / s);
        }
        let err = (err / n.max(1) as f64).sqrt();
        steps += 1;

        if err <= 1.0 {
            let mut r = [y.clone(), vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
            for i in 0..n {
                let ydiff = ynew[i] - y[i];
                let bspl = hs * k1[i] - ydiff;
                r[1][i] = ydiff;
                r[2][i] = bspl;
                r[3][i] = ydiff - hs * k7[i] - bspl;
                r[4][i] = hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
            }
            sol.segments.push(Segment { t0: t, h: hs, r });
            t = t_new;
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            sol.times.push(t);
            sol.states.push(y.clone());
            reject_streak = 0;
            if last {
                break;
            }
            let fac = if err == 0.0 {
                10.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 10.0)
            };
            h = (h * fac).min(max_step);
        } else {
            reject_streak += 1;
            let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            h *= if reject_streak > 3 { 0.1 } else { fac };
        }
    }
    sol.rhs_evaluations = evals;
    Ok(sol)
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    rhs: &mut F,
    t: f64,
    y: &[f64],
    f0: &[f64],
    dir: f64,
    max_step: f64,
    opts: &OdeOptions,
    evals: &mut usize,
) -> Result<f64>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len().max(1) as f64;
    let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.abs()).collect();
    let d0 = (y.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(v, s)| (v / s).powi(2)).sum::<f64>() / n).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(max_step);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(v, f)| v + dir * h0 * f).collect();
    let mut f1 = vec![0.0; y.len()];
    call(rhs, t + dir * h0, &y1, &mut f1, evals)?;
    let d2 = (f1
        .iter()
        .zip(f0)
        .zip(&sc)
        .map(|((a, b), s)| ((a - b) / s).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(max_step))
}

fn rk4_fixed<F>(rhs: &mut F, t0: f64, y0: &[f64], t1: f64, step: f64) -> Result<DenseSolution>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(step > 0.0) {
        return Err(Error::invalid("fixed step must be positive"));
    }
    let n = y0.len();
    let mut sol = DenseSolution {
        dim: n,
        times: vec![t0],
        states: vec![y0.to_vec()],
        segments: Vec::new(),
        rhs_evaluations: 0,
    };
    if t1 == t0 {
        return Ok(sol);
    }
    let dir = (t1 - t0).signum();
    let nsteps = ((t1 - t0).abs() / step).ceil().max(1.0) as usize;
    let mut y = y0.to_vec();
    let mut evals = 0usize;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut f_end = vec![0.0; n];
    call(rhs, t0, &y, &mut k1, &mut evals)?;
    for s in 0..nsteps {
        let t = t0 + dir * step * s as f64;
        let t_next = if s + 1 == nsteps {
            t1
        } else {
            t0 + dir * step * (s + 1) as f64
        };
        let h = t_next - t;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        call(rhs, t + 0.5 * h, &tmp, &mut k2, &mut evals)?;
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        call(rhs, t + 0.5 * h, &tmp, &mut k3, &mut evals)?;
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        call(rhs, t_next, &tmp, &mut k4, &mut evals)?;
        let ynew: Vec<f64> = (0..n)
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        call(rhs, t_next, &ynew, &mut f_end, &mut evals)?;
        let mut r = [y.clone(), vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n {
            let ydiff = ynew[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * f_end[i] - bspl;
        }
        sol.segments.push(Segment { t0: t, h, r });
        sol.times.push(t_next);
        sol.states.push(ynew.clone());
        y = ynew;
        std::mem::swap(&mut k1, &mut f_end);
    }
    sol.rhs_evaluations = evals;
    Ok(sol)
}

/// Integrate and return the state at each requested time (monotone along the
/// integration direction).
pub fn integrate_to<F>(rhs: F, t0: f64, y0: &[f64], times: &[f64], opts: &OdeOptions) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let Some(&t_last) = times.last() else {
        return Ok(Vec::new());
    };
    let sol = integrate(rhs, t0, y0, t_last, opts)?;
    times
        .iter()
        .map(|&t| {
            sol.eval(t).ok_or(Error::Ode {
                t,
                reason: "requested time outside integration span".into(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_rhs(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = y[0];
        Ok(())
    }

    #[test]
    fn exponential_growth_endpoint() {
        let sol = integrate(exp_rhs, 0.0, &[1.0], 1.0, &OdeOptions::default()).unwrap();
        let e = std::f64::consts::E;
        assert!((sol.final_state()[0] - e).abs() < 1e-9 * e);
    }

    #[test]
    fn dense_output_matches_between_nodes() {
        let sol = integrate(exp_rhs, 0.0, &[1.0], 2.0, &OdeOptions::default()).unwrap();
        let mut worst: f64 = 0.0;
        for k in 0..=400 {
            let t = 2.0 * k as f64 / 400.0;
            let y = sol.eval(t).unwrap()[0];
            worst = worst.max((y - t.exp()).abs() / t.exp());
        }
        assert!(worst < 1e-9, "dense relative error {worst:e}");
    }

    #[test]
    fn backward_integration() {
        let sol = integrate(exp_rhs, 1.0, &[1.0], -1.0, &OdeOptions::default()).unwrap();
        assert!((sol.final_state()[0] - (-2.0f64).exp()).abs() < 1e-10);
        let mid = sol.eval(0.0).unwrap()[0];
        assert!((mid - (-1.0f64).exp()).abs() < 1e-10);
        assert!(sol.eval(1.5).is_none());
    }

    #[test]
    fn harmonic_oscillator_period() {
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
            Ok(())
        };
        let tau = 2.0 * std::f64::consts::PI;
        let sol = integrate(rhs, 0.0, &[1.0, 0.0], tau, &OdeOptions::default()).unwrap();
        let y = sol.final_state();
        assert!((y[0] - 1.0).abs() < 1e-8 && y[1].abs() < 1e-8);
    }

    #[test]
    fn rk4_fixed_is_fourth_order() {
        let err = |h: f64| {
            let sol = integrate(exp_rhs, 0.0, &[1.0], 1.0, &OdeOptions::fixed(h)).unwrap();
            (sol.final_state()[0] - std::f64::consts::E).abs()
        };
        let order = (err(0.1) / err(0.05)).log2();
        assert!((order - 4.0).abs() < 0.2, "order {order}");
    }

    #[test]
    fn fixed_step_is_bit_reproducible() {
        let a = integrate(exp_rhs, 0.0, &[1.0], 1.3, &OdeOptions::fixed(0.01)).unwrap();
        let b = integrate(exp_rhs, 0.0, &[1.0], 1.3, &OdeOptions::fixed(0.01)).unwrap();
        assert_eq!(a.final_state()[0].to_bits(), b.final_state()[0].to_bits());
        assert_eq!(a.eval(0.777).unwrap()[0].to_bits(), b.eval(0.777).unwrap()[0].to_bits());
    }

    #[test]
    fn rhs_error_propagates() {
        let rhs = |t: f64, _y: &[f64], dy: &mut [f64]| {
            if t > 0.5 {
                return Err(Error::inadmissible(&[t], "stop"));
            }
            dy[0] = 1.0;
            Ok(())
        };
        let err = integrate(rhs, 0.0, &[0.0], 1.0, &OdeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Inadmissible { .. }));
    }

    #[test]
    fn blowup_detected() {
        // y' = y^2, y(0)=1 blows up at t = 1
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[0] * y[0];
            Ok(())
        };
        assert!(integrate(rhs, 0.0, &[1.0], 2.0, &OdeOptions::default()).is_err());
    }
}
