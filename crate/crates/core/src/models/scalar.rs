//! Travelling waves `u = U(x − s t)` of a scalar balance law
//! `u_t + a(u) u_x = f(u)`: the profile solves `(a(U) − s) U' = f(U)`.

use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::field::SolutionField;
use crate::ode::{integrate, DenseSolution, OdeOptions};
use crate::system::State;

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct ScalarProfile {
    pub s: f64,
    pub u0: f64,
    forward: DenseSolution,
    backward: DenseSolution,
}

impl std::fmt::Debug for ScalarProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarProfile")
            .field("s", &self.s)
            .field("u0", &self.u0)
            .field("window", &self.window())
            .finish()
    }
}

impl ScalarProfile {
    pub fn window(&self) -> (f64, f64) {
        (self.backward.t_end(), self.forward.t_end())
    }

    pub fn at(&self, sigma: f64) -> Result<f64> {
        let sol = if sigma >= 0.0 { &self.forward } else { &self.backward };
        sol.eval(sigma).map(|v| v[0]).ok_or(Error::OutsideDomain { x: sigma, t: 0.0 })
    }
}

impl SolutionField for ScalarProfile {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, x: f64, t: f64) -> Result<State> {
        self.at(x - self.s * t)
            .map(|v| DVector::from_element(1, v))
            .map_err(|_| Error::OutsideDomain { x, t })
    }
}

/// Integrate the profile ODE from `U(0) = u0` over `sigma_range` (containing 0).
pub fn scalar_demo<A, F>(a: A, f: F, s: f64, u0: f64, sigma_range: (f64, f64), opts: &OdeOptions) -> Result<ScalarProfile>
where
    A: Fn(f64) -> f64 + Send + Sync + 'static,
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let (lo, hi) = sigma_range;
    if !(lo <= 0.0 && hi >= 0.0) {
        return Err(Error::invalid(format!("sigma range [{lo}, {hi}] must contain 0")));
    }
    let a: ScalarFn = Arc::new(a);
    let f: ScalarFn = Arc::new(f);
    let tol = 1e-8 * (1.0 + s.abs());
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let gap = a(y[0]) - s;
        if gap.abs() <= tol {
            return Err(Error::SonicPoint { value: y[0], gap });
        }
        dy[0] = f(y[0]) / gap;
        Ok(())
    };
    let mut probe = [0.0];
    rhs(0.0, &[u0], &mut probe)?;
    let forward = integrate(rhs, 0.0, &[u0], hi, opts)?;
    let backward = integrate(rhs, 0.0, &[u0], lo, opts)?;
    Ok(ScalarProfile {
        s,
        u0,
        forward,
        backward,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn homogeneous_gives_constant() {
        let p = scalar_demo(|u| u, |_| 0.0, 1.0, 2.0, (-3.0, 3.0), &OdeOptions::default()).unwrap();
        for sigma in [-3.0, -1.0, 0.0, 2.9] {
            assert_eq!(p.at(sigma).unwrap(), 2.0);
        }
    }

    #[test]
    fn implicit_solution_of_u_du_equals_one_minus_u() {
        // u u' = 1 − u integrates to −u − ln(1 − u) = σ + C
        let p = scalar_demo(|u| u, |u| 1.0 - u, 0.0, 0.5, (-0.1, 1.0), &OdeOptions::default()).unwrap();
        let g = |u: f64| -u - (1.0 - u).ln();
        for sigma in [-0.1, 0.3, 1.0] {
            let u = p.at(sigma).unwrap();
            assert!((g(u) - g(0.5) - sigma).abs() < 1e-9);
        }
    }

    #[test]
    fn sonic_start_is_rejected() {
        let err = scalar_demo(|u| u, |u| 1.0 - u, 0.5, 0.5, (-1.0, 1.0), &OdeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SonicPoint { .. }));
    }

    #[test]
    fn sonic_crossing_is_rejected() {
        // U' = 1/(U − 1) drives U toward the sonic value 1 from below in finite σ
        let err = scalar_demo(|u| u, |_| -1.0, 1.0, 0.9, (0.0, 1.0), &OdeOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SonicPoint { .. } | Error::Ode { .. }), "{err:?}");
    }
}
