//! Compatibility of the system with `N−1` constraints `l^i · U_x = q^i`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::probe::{source_along, EigenDerivative, ResidualProbe};
use crate::error::{Error, Result};
use crate::spectral::decompose;
use crate::system::{HyperbolicSystem, State};

pub type ConstraintFn = Arc<dyn Fn(f64, f64, &State) -> Result<f64> + Send + Sync>;

/// Constraints `l^i · U_x = q^i(x, t, U)` attached to every family except
/// `free_family`, whose coefficient `π` stays unconstrained.
#[derive(Clone)]
pub struct ConstraintSet {
    dim: usize,
    free_family: usize,
    sources: Vec<ConstraintFn>,
}

impl fmt::Debug for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSet")
            .field("dim", &self.dim)
            .field("free_family", &self.free_family)
            .field("attached", &self.attached())
            .finish()
    }
}

impl ConstraintSet {
    /// `sources[a]` is `q` for the `a`-th attached family, in ascending order.
    pub fn new(dim: usize, free_family: usize, sources: Vec<ConstraintFn>) -> Result<Self> {
        if free_family >= dim {
            return Err(Error::invalid(format!(
                "free family {free_family} out of range for N = {dim}"
            )));
        }
        if sources.len() != dim - 1 {
            return Err(Error::invalid(format!(
                "need exactly N-1 = {} constraint sources, got {}",
                dim - 1,
                sources.len()
            )));
        }
        Ok(Self {
            dim,
            free_family,
            sources,
        })
    }

    /// All `q^i = 0`.
    pub fn homogeneous(dim: usize, free_family: usize) -> Result<Self> {
        let zero: ConstraintFn = Arc::new(|_, _, _| Ok(0.0));
        Self::new(dim, free_family, vec![zero; dim.saturating_sub(1)])
    }

    /// Constraint sources depending on the state only.
    pub fn autonomous<F>(dim: usize, free_family: usize, sources: Vec<F>) -> Result<Self>
    where
        F: Fn(&State) -> Result<f64> + Send + Sync + 'static,
    {
        let sources = sources
            .into_iter()
            .map(|f| Arc::new(move |_: f64, _: f64, u: &State| f(u)) as ConstraintFn)
            .collect();
        Self::new(dim, free_family, sources)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn free_family(&self) -> usize {
        self.free_family
    }

    /// Families carrying a constraint, ascending.
    pub fn attached(&self) -> Vec<usize> {
        (0..self.dim).filter(|&i| i != self.free_family).collect()
    }

    pub fn source(&self, a: usize) -> &ConstraintFn {
        &self.sources[a]
    }

    pub fn eval(&self, x: f64, t: f64, u: &State) -> Result<Vec<f64>> {
        self.sources.iter().map(|q| q(x, t, u)).collect()
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        if n == self.dim {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "constraint set is for N = {}, system has N = {n}",
                self.dim
            )))
        }
    }
}

/// Left-hand sides of the two compatibility conditions, one entry per
/// attached family. The mixed-partial mismatch `l^i·(∂_x U_t − ∂_t U_x)` of
/// the reduced system equals `−(res1 + π res2)`, so involution for every
/// `π` means both vanish.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvolutionResidual {
    pub res1: Vec<f64>,
    pub res2: Vec<f64>,
}

impl InvolutionResidual {
    /// `res1 + π res2` for a particular value of the free coefficient.
    pub fn mismatch(&self, pi: f64) -> Vec<f64> {
        self.res1.iter().zip(&self.res2).map(|(a, b)| a + pi * b).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.res1.iter().chain(&self.res2).fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Evaluate both compatibility conditions at `(x, t, U)`.
pub fn involutiveness_residual<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    cs: &ConstraintSet,
    x: f64,
    t: f64,
    u: &State,
    probe: &ResidualProbe,
) -> Result<InvolutionResidual> {
    let n = sys.dim();
    cs.check_dim(n)?;
    let dec = decompose(sys, u)?;
    let b = sys.source(u);
    let nf = cs.free_family();
    let fam = cs.attached();
    let q = cs.eval(x, t, u)?;
    let lam = &dec.lambdas;
    let (d, l) = (&dec.right, &dec.left);

    // eigenstructure derivatives along every d^k and along B
    let along_d: Vec<EigenDerivative> = (0..n)
        .map(|k| EigenDerivative::along(sys, probe, u, &d[k]))
        .collect::<Result<_>>()?;
    let along_b = EigenDerivative::along(sys, probe, u, &b)?;
    let b_along_d: Vec<State> = (0..n).map(|k| source_along(sys, probe, u, &d[k])).collect::<Result<_>>()?;

    let mut res1 = vec![0.0; fam.len()];
    let mut res2 = vec![0.0; fam.len()];
    for (a, &i) in fam.iter().enumerate() {
        let qi = cs.source(a);
        let grad_q = probe.gradient(|s| qi(x, t, s), u)?;
        let qx = probe.scalar(|xx| qi(xx, t, u), x)?;
        let qt = probe.scalar(|tt| qi(x, tt, u), t)?;

        let mut drift = b.clone();
        for (c, &j) in fam.iter().enumerate() {
            drift -= &d[j] * (q[c] * (lam[j] - lam[i]));
        }
        let mut r1 = qt + lam[i] * qx + grad_q.dot(&drift);
        for (c, &j) in fam.iter().enumerate() {
            for (e, &k) in fam.iter().enumerate() {
                r1 += q[c] * q[e] * (lam[j] - lam[k]) * l[i].dot(&along_d[k].dright[j]);
            }
        }
        for (e, &k) in fam.iter().enumerate() {
            let bracket = l[i].dot(&(&along_b.dright[k] - &b_along_d[k]));
            r1 += q[e] * (bracket + q[a] * along_d[k].dlambda[i]);
        }

        let mut r2 = (lam[i] - lam[nf]) * grad_q.dot(&d[nf]);
        for (e, &k) in fam.iter().enumerate() {
            let comm = &along_d[nf].dright[k] - &along_d[k].dright[nf];
            r2 += q[e] * (lam[k] - lam[nf]) * l[i].dot(&comm);
        }
        r2 += l[i].dot(&(&along_b.dright[nf] - &b_along_d[nf]));
        r2 += q[a] * along_d[nf].dlambda[i];
        res1[a] = r1;
        res2[a] = r2;
    }
    Ok(InvolutionResidual { res1, res2 })
}

/// Residual `l^i(U₀)·U₀'(x) − q^i(x, 0, U₀)` of initial data against the
/// constraints, with `U₀'` by central differences of step `h`.
pub fn initial_data_residual<S, F>(sys: &S, cs: &ConstraintSet, u0: F, x: f64, h: f64) -> Result<Vec<f64>>
where
    S: HyperbolicSystem + ?Sized,
    F: Fn(f64) -> Result<State>,
{
    let u = u0(x)?;
    let ux = (u0(x + h)? - u0(x - h)?) / (2.0 * h);
    let dec = decompose(sys, &u)?;
    let q = cs.eval(x, 0.0, &u)?;
    Ok(cs
        .attached()
        .iter()
        .zip(q)
        .map(|(&i, qi)| dec.left[i].dot(&ux) - qi)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BarotropicModel, ForceSpec, PressureLaw};
    use crate::system::GenericSystem;
    use nalgebra::{dmatrix, dvector, DMatrix};

    /// Total-derivative oracle: differentiates the reduced expressions for
    /// `U_t` and `U_x` (with constant `π`) and projects the mismatch.
    fn mixed_partial_mismatch<S: HyperbolicSystem>(sys: &S, cs: &ConstraintSet, x: f64, t: f64, u: &State, pi: f64) -> Vec<f64> {
        let fam = cs.attached();
        let nf = cs.free_family();
        let ux_of = |x: f64, t: f64, s: &State| -> State {
            let dec = decompose(sys, s).unwrap();
            let q = cs.eval(x, t, s).unwrap();
            let mut v = &dec.right[nf] * pi;
            for (a, &i) in fam.iter().enumerate() {
                v += &dec.right[i] * q[a];
            }
            v
        };
        let ut_of = |x: f64, t: f64, s: &State| -> State {
            let dec = decompose(sys, s).unwrap();
            let q = cs.eval(x, t, s).unwrap();
            let mut v = sys.source(s) - &dec.right[nf] * (pi * dec.lambdas[nf]);
            for (a, &i) in fam.iter().enumerate() {
                v -= &dec.right[i] * (q[a] * dec.lambdas[i]);
            }
            v
        };
        let h = 1e-5;
        let ux = ux_of(x, t, u);
        let ut = ut_of(x, t, u);
        let total = |g: &dyn Fn(f64, f64, &State) -> State, dir: &State, in_x: bool| -> State {
            let (dx, dt) = if in_x { (h, 0.0) } else { (0.0, h) };
            let plus = g(x + dx, t + dt, &(u + dir * h));
            let minus = g(x - dx, t - dt, &(u - dir * h));
            (plus - minus) / (2.0 * h)
        };
        let dx_ut = total(&ut_of, &ux, true);
        let dt_ux = total(&ux_of, &ut, false);
        let dec = decompose(sys, u).unwrap();
        fam.iter().map(|&i| dec.left[i].dot(&(&dx_ut - &dt_ux))).collect()
    }

    fn lin_quad_system() -> GenericSystem {
        // a genuinely nonlinear 2×2 system with a source
        GenericSystem::new(
            vec!["a".into(), "b".into()],
            |u| dmatrix![u[0], 0.3; 0.2 * u[1], 2.0 + u[0]],
            |u| dvector![0.1 * u[1] * u[1], -0.3 * u[0]],
        )
    }

    #[test]
    fn homogeneous_constraints_of_homogeneous_system_vanish() {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 1.4), ForceSpec::None);
        let cs = ConstraintSet::homogeneous(2, 1).unwrap();
        for u in [dvector![1.0, 0.0], dvector![0.3, 2.0], dvector![5.0, -1.0]] {
            let r = involutiveness_residual(&m, &cs, 0.0, 0.0, &u, &ResidualProbe::default()).unwrap();
            assert!(r.max_abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn matches_mixed_partial_oracle() {
        let sys = lin_quad_system();
        let cs = ConstraintSet::new(
            2,
            1,
            vec![Arc::new(|x: f64, t: f64, u: &State| {
                Ok(0.3 * u[0] * u[1] + 0.1 * x - 0.2 * t * u[0])
            })],
        )
        .unwrap();
        let u = dvector![0.4, -0.7];
        let r = involutiveness_residual(&sys, &cs, 0.3, 0.2, &u, &ResidualProbe::default()).unwrap();
        for pi in [0.0, 1.3, -2.0] {
            let oracle = mixed_partial_mismatch(&sys, &cs, 0.3, 0.2, &u, pi);
            let ours = r.mismatch(pi);
            assert!((oracle[0] + ours[0]).abs() < 1e-6, "pi={pi}: {oracle:?} vs {ours:?}");
        }
    }

    #[test]
    fn three_component_system_matches_oracle() {
        let sys = GenericSystem::new(
            vec!["a".into(), "b".into(), "c".into()],
            |u| {
                DMatrix::from_row_slice(
                    3,
                    3,
                    &[
                        u[0],
                        0.2,
                        0.0, //
                        0.1,
                        2.0 + 0.1 * u[1],
                        0.1 * u[2], //
                        0.0,
                        0.3,
                        4.0 - u[2],
                    ],
                )
            },
            |u| dvector![0.2 * u[1], u[0] * u[2] * 0.1, -0.4],
        );
        let cs = ConstraintSet::autonomous(
            3,
            2,
            vec![
                Box::new(|u: &State| Ok(0.2 * u[0] + 0.1)) as Box<dyn Fn(&State) -> Result<f64> + Send + Sync>,
                Box::new(|u: &State| Ok(-0.3 * u[1] * u[2])),
            ],
        )
        .unwrap();
        let u = dvector![0.2, 0.5, 0.4];
        let r = involutiveness_residual(&sys, &cs, 0.0, 0.0, &u, &ResidualProbe::default()).unwrap();
        for pi in [0.0, 0.7] {
            let oracle = mixed_partial_mismatch(&sys, &cs, 0.0, 0.0, &u, pi);
            let ours = r.mismatch(pi);
            for a in 0..2 {
                assert!((oracle[a] + ours[a]).abs() < 1e-6, "{oracle:?} vs {ours:?}");
            }
        }
    }

    #[test]
    fn perturbed_constraint_is_detected() {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 2.0), ForceSpec::None);
        let cs = ConstraintSet::autonomous(2, 1, vec![|_: &State| Ok(0.1)]).unwrap();
        let r = involutiveness_residual(&m, &cs, 0.0, 0.0, &dvector![1.2, 0.3], &ResidualProbe::default()).unwrap();
        assert!(r.max_abs() > 1e-3);
    }

    #[test]
    fn initial_data_check() {
        // l^1 · U' for a 1-simple wave of the diagonal system is u0'
        let sys = GenericSystem::diagonal(vec![1.0, 2.0], |_| dvector![0.0, 0.0]);
        let cs = ConstraintSet::homogeneous(2, 1).unwrap();
        let flat = initial_data_residual(&sys, &cs, |x| Ok(dvector![1.0, x.sin()]), 0.4, 1e-5).unwrap();
        assert!(flat[0].abs() < 1e-12);
        let bad = initial_data_residual(&sys, &cs, |x| Ok(dvector![x, 0.0]), 0.4, 1e-5).unwrap();
        assert!((bad[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_wrong_constraint_count() {
        assert!(ConstraintSet::new(3, 0, vec![]).is_err());
        assert!(ConstraintSet::homogeneous(2, 2).is_err());
    }
}
