//! Compatibility conditions written in Riemann-invariant coordinates.
//!
//! With `w^α = σ^α_β q^β` and `z^α = σ^α_β (l^β·B − λ^β q^β)` (sums over
//! the non-distinguished families `β`), involution of
//! `∂_x R^α = w^α`, `∂_t R^α = z^α`, `∂_t v + λ^N ∂_x v = h` requires
//!
//! ```text
//! res_c1^α = −(∂_v z^α + λ^N ∂_v w^α)                                   = 0
//! res_c2^α = ∂_γ w^α z^γ − ∂_γ z^α w^γ + ∂_v w^α h + ∂_t w^α − ∂_x z^α = 0
//! ```
//!
//! where `∂_v` is taken at fixed `R`, `∂_γ = ∂/∂R^γ` at fixed `v`, and
//! `h = B_j + (λ^N − λ^β) q^β d^β_j`. Expanding `res_c1` reproduces the
//! ODE-like system in `q` term by term, with every repeated `β` summed.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::chart::{ChartGeometry, InvariantChart};
use super::involution::ConstraintSet;
use super::probe::ResidualProbe;
use crate::error::{Error, Result};
use crate::system::{HyperbolicSystem, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiemannCompatResidual {
    pub res_c1: Vec<f64>,
    pub res_c2: Vec<f64>,
}

impl RiemannCompatResidual {
    pub fn max_abs(&self) -> f64 {
        self.res_c1.iter().chain(&self.res_c2).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `(w, z)` stacked, at `(x, t, U)`.
fn wz<S, C>(sys: &S, chart: &C, cs: &ConstraintSet, x: f64, t: f64, u: &State) -> Result<DVector<f64>>
where
    S: HyperbolicSystem + ?Sized,
    C: InvariantChart + ?Sized,
{
    let g = ChartGeometry::at(sys, chart, u)?;
    let q = DVector::from_vec(cs.eval(x, t, u)?);
    let b = sys.source(u);
    let m = g.others.len();
    let lb = DVector::from_fn(m, |a, _| g.dec.left[g.others[a]].dot(&b) - g.dec.lambdas[g.others[a]] * q[a]);
    let w = &g.sigma * &q;
    let z = &g.sigma * lb;
    let mut out = DVector::zeros(2 * m);
    out.rows_mut(0, m).copy_from(&w);
    out.rows_mut(m, m).copy_from(&z);
    Ok(out)
}

pub fn riemann_compat_residual<S, C>(
    sys: &S,
    chart: &C,
    cs: &ConstraintSet,
    x: f64,
    t: f64,
    u: &State,
    probe: &ResidualProbe,
) -> Result<RiemannCompatResidual>
where
    S: HyperbolicSystem + ?Sized,
    C: InvariantChart + ?Sized,
{
    cs.check_dim(sys.dim())?;
    if cs.free_family() != chart.family() {
        return Err(Error::invalid(format!(
            "constraint set leaves family {} free but the chart distinguishes family {}",
            cs.free_family(),
            chart.family()
        )));
    }
    let g = ChartGeometry::at(sys, chart, u)?;
    let m = g.others.len();
    let j = chart.retained();
    let nf = chart.family();
    let lam_n = g.dec.lambdas[nf];
    let q = cs.eval(x, t, u)?;
    let f = |s: &State| wz(sys, chart, cs, x, t, s);
    let base = f(u)?;
    let (w, z) = (base.rows(0, m).into_owned(), base.rows(m, m).into_owned());

    let dv = probe.along(f, u, &g.v_direction)?;
    let dr: Vec<DVector<f64>> = (0..m)
        .map(|c| probe.along(f, u, &g.r_directions.column(c).into_owned()))
        .collect::<Result<_>>()?;
    let step = |v: f64| probe.rel_step * v.abs().max(1.0);
    let (hx, ht) = (step(x), step(t));
    let dx = (wz(sys, chart, cs, x + hx, t, u)? - wz(sys, chart, cs, x - hx, t, u)?) / (2.0 * hx);
    let dt = (wz(sys, chart, cs, x, t + ht, u)? - wz(sys, chart, cs, x, t - ht, u)?) / (2.0 * ht);

    let mut h = sys.source(u)[j];
    for (a, &beta) in g.others.iter().enumerate() {
        h += (lam_n - g.dec.lambdas[beta]) * q[a] * g.dec.right[beta][j];
    }

    let mut res_c1 = vec![0.0; m];
    let mut res_c2 = vec![0.0; m];
    for a in 0..m {
        res_c1[a] = -(dv[m + a] + lam_n * dv[a]);
        let mut r = dv[a] * h + dt[a] - dx[m + a];
        for c in 0..m {
            r += dr[c][a] * z[c] - dr[c][m + a] * w[c];
        }
        res_c2[a] = r;
    }
    Ok(RiemannCompatResidual { res_c1, res_c2 })
}
