//! State-space derivatives `∇ = ∂/∂U`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::system::State;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GradientMode {
    /// Use the model-provided derivative; fail if there is none.
    Analytic,
    #[default]
    CentralDifference,
}

/// Central differences with step `h_k = rel_step · max(1, |u_k|)`, or
/// pass-through of analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientOperator {
    pub mode: GradientMode,
    pub rel_step: f64,
}

impl Default for GradientOperator {
    fn default() -> Self {
        Self {
            mode: GradientMode::CentralDifference,
            rel_step: 1e-6,
        }
    }
}

type ScalarFn<'a> = dyn Fn(&State) -> Result<f64> + 'a;
type VectorFn<'a> = dyn Fn(&State) -> Result<DVector<f64>> + 'a;

impl GradientOperator {
    pub fn difference(rel_step: f64) -> Self {
        Self {
            mode: GradientMode::CentralDifference,
            rel_step,
        }
    }

    pub fn analytic() -> Self {
        Self {
            mode: GradientMode::Analytic,
            ..Self::default()
        }
    }

    pub fn step(&self, u: &State, k: usize) -> f64 {
        self.rel_step * u[k].abs().max(1.0)
    }

    /// Gradient of a scalar field as a column vector.
    pub fn grad_scalar(&self, f: &ScalarFn<'_>, analytic: Option<&VectorFn<'_>>, u: &State) -> Result<DVector<f64>> {
        if self.mode == GradientMode::Analytic {
            let g = analytic.ok_or(Error::MissingAnalyticJacobian { what: "scalar gradient" })?;
            return g(u);
        }
        let n = u.len();
        let mut out = DVector::zeros(n);
        for k in 0..n {
            let h = self.step(u, k);
            let (up, dn) = shifted(u, k, h);
            out[k] = (f(&up)? - f(&dn)?) / (2.0 * h);
        }
        Ok(out)
    }

    /// Jacobian `J_ik = ∂g_i/∂u_k`.
    pub fn grad_vector(
        &self,
        g: &VectorFn<'_>,
        analytic: Option<&dyn Fn(&State) -> Result<DMatrix<f64>>>,
        u: &State,
    ) -> Result<DMatrix<f64>> {
        if self.mode == GradientMode::Analytic {
            let j = analytic.ok_or(Error::MissingAnalyticJacobian { what: "vector Jacobian" })?;
            return j(u);
        }
        jacobian(g, u, self.rel_step)
    }

    /// Derivative of `f` along direction `e` (not normalized) at `u`.
    pub fn directional(&self, f: &VectorFn<'_>, u: &State, e: &DVector<f64>) -> Result<DVector<f64>> {
        let scale = e.amax().max(f64::MIN_POSITIVE);
        let h = self.rel_step * u.amax().max(1.0) / scale;
        let up = u + e * h;
        let dn = u - e * h;
        Ok((f(&up)? - f(&dn)?) / (2.0 * h))
    }
}

/// Central-difference Jacobian with relative step `rel`.
pub fn jacobian(g: &VectorFn<'_>, u: &State, rel: f64) -> Result<DMatrix<f64>> {
    let n = u.len();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        let h = rel * u[k].abs().max(1.0);
        let (up, dn) = shifted(u, k, h);
        cols.push((g(&up)? - g(&dn)?) / (2.0 * h));
    }
    Ok(DMatrix::from_columns(&cols))
}

fn shifted(u: &State, k: usize, h: f64) -> (State, State) {
    let mut up = u.clone();
    let mut dn = u.clone();
    up[k] += h;
    dn[k] -= h;
    (up, dn)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> State {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn bilinear_gradient() {
        let op = GradientOperator::default();
        let g = op.grad_scalar(&|u: &State| Ok(u[0] * u[1]), None, &v(&[2.0, 3.0])).unwrap();
        assert!((g[0] - 3.0).abs() < 1e-9);
        assert!((g[1] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn identity_jacobian() {
        let op = GradientOperator::default();
        let j = op
            .grad_vector(&|u: &State| Ok(u.clone()), None, &v(&[0.5, -4.0, 10.0]))
            .unwrap();
        assert!((j - DMatrix::identity(3, 3)).amax() < 1e-9);
    }

    #[test]
    fn quadratic_matches_analytic() {
        // f = u0^2 + 3 u0 u1 - u1^2
        let f = |u: &State| Ok(u[0] * u[0] + 3.0 * u[0] * u[1] - u[1] * u[1]);
        let df = |u: &State| Ok(v(&[2.0 * u[0] + 3.0 * u[1], 3.0 * u[0] - 2.0 * u[1]]));
        let u = v(&[1.7, -0.4]);
        let num = GradientOperator::default().grad_scalar(&f, None, &u).unwrap();
        let ana = GradientOperator::analytic().grad_scalar(&f, Some(&df), &u).unwrap();
        assert!((num - ana).amax() < 1e-8);
    }

    #[test]
    fn analytic_mode_without_derivative_fails() {
        let err = GradientOperator::analytic()
            .grad_scalar(&|u: &State| Ok(u[0]), None, &v(&[1.0]))
            .unwrap_err();
        assert!(matches!(err, Error::MissingAnalyticJacobian { .. }));
    }

    #[test]
    fn second_order_convergence() {
        let f = |u: &State| Ok((u[0]).sin() * (2.0 * u[1]).exp());
        let exact = |u: &State| (u[0]).cos() * (2.0 * u[1]).exp();
        let u = v(&[0.3, 0.2]);
        let err = |h: f64| {
            let g = GradientOperator::difference(h).grad_scalar(&f, None, &u).unwrap();
            (g[0] - exact(&u)).abs()
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order}");
    }

    #[test]
    fn inadmissible_neighbour_propagates() {
        let f = |u: &State| {
            if u[0] <= 0.0 {
                Err(Error::inadmissible(u.as_slice(), "rho <= 0"))
            } else {
                Ok(u[0].ln())
            }
        };
        let err = GradientOperator::difference(1e-3)
            .grad_scalar(&f, None, &v(&[1e-4]))
            .unwrap_err();
        assert!(matches!(err, Error::Inadmissible { .. }));
    }
}
