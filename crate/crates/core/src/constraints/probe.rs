use nalgebra::DVector;

use crate::error::Result;
use crate::spectral::{decompose, SpectralDecomposition};
use crate::system::{HyperbolicSystem, State};

/// Finite-difference settings of the residual evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualProbe {
    /// Relative step of every central difference.
    pub rel_step: f64,
}

impl Default for ResidualProbe {
    fn default() -> Self {
        Self { rel_step: 1e-5 }
    }
}

impl ResidualProbe {
    /// Derivative of `f` along `e` (not normalized) at `u`; zero for `e = 0`.
    pub fn along<F>(&self, f: F, u: &State, e: &DVector<f64>) -> Result<DVector<f64>>
    where
        F: Fn(&State) -> Result<DVector<f64>>,
    {
        let scale = e.amax();
        if scale == 0.0 {
            return Ok(DVector::zeros(f(u)?.len()));
        }
        let h = self.rel_step * u.amax().max(1.0) / scale;
        Ok((f(&(u + e * h))? - f(&(u - e * h))?) / (2.0 * h))
    }

    /// Gradient (as a column) of a scalar `f`.
    pub fn gradient<F>(&self, f: F, u: &State) -> Result<DVector<f64>>
    where
        F: Fn(&State) -> Result<f64>,
    {
        let mut g = DVector::zeros(u.len());
        for k in 0..u.len() {
            let h = self.rel_step * u[k].abs().max(1.0);
            let mut up = u.clone();
            let mut dn = u.clone();
            up[k] += h;
            dn[k] -= h;
            g[k] = (f(&up)? - f(&dn)?) / (2.0 * h);
        }
        Ok(g)
    }

    /// Derivative of a scalar function of one real variable.
    pub fn scalar<F>(&self, f: F, at: f64) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let h = self.rel_step * at.abs().max(1.0);
        Ok((f(at + h)? - f(at - h)?) / (2.0 * h))
    }
}

/// `(λ, d^0, …, d^{N−1})` packed into one vector so that a single
/// directional difference differentiates the whole right eigenstructure.
pub(crate) fn packed_right<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State) -> Result<DVector<f64>> {
    let dec = decompose(sys, u)?;
    Ok(pack(&dec))
}

pub(crate) fn pack(dec: &SpectralDecomposition) -> DVector<f64> {
    let n = dec.dim();
    let mut p = DVector::zeros(n + n * n);
    for i in 0..n {
        p[i] = dec.lambdas[i];
        p.rows_mut(n + i * n, n).copy_from(&dec.right[i]);
    }
    p
}

/// Directional derivative of the eigenstructure: `(∇λ^i · e, ∇d^i e)`.
pub(crate) struct EigenDerivative {
    pub dlambda: Vec<f64>,
    pub dright: Vec<DVector<f64>>,
}

impl EigenDerivative {
    pub fn along<S: HyperbolicSystem + ?Sized>(sys: &S, probe: &ResidualProbe, u: &State, e: &DVector<f64>) -> Result<Self> {
        let n = sys.dim();
        let p = probe.along(|s| packed_right(sys, s), u, e)?;
        Ok(Self {
            dlambda: p.rows(0, n).iter().copied().collect(),
            dright: (0..n).map(|i| p.rows(n + i * n, n).into_owned()).collect(),
        })
    }
}

/// `∇B e`, analytic when the model provides `∇B`.
pub(crate) fn source_along<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    probe: &ResidualProbe,
    u: &State,
    e: &DVector<f64>,
) -> Result<DVector<f64>> {
    match sys.source_jacobian(u) {
        Some(j) => Ok(j * e),
        None => probe.along(
            |s| {
                sys.check_admissible(s)?;
                Ok(sys.source(s))
            },
            u,
            e,
        ),
    }
}
