//! Structural conditions on `(A, B)` for the two solvable cases.
//!
//! * case (i), `q = 0`: `S^α = σ^α_β l^β·B` must be a function of `R` alone;
//! * case (ii): `σ (l·B − λ q) = F(R)`, `σ q = G(R)` with `[F, G] = 0`, i.e.
//!   `∂G^α/∂R^β F^β − ∂F^α/∂R^β G^β = 0`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::chart::{ChartGeometry, InvariantChart};
use super::probe::ResidualProbe;
use crate::error::{Error, Result};
use crate::system::{HyperbolicSystem, State};

/// `S^α(U) = σ^α_β l^β · B`.
pub fn case_i_function<S, C>(sys: &S, chart: &C, u: &State) -> Result<Vec<f64>>
where
    S: HyperbolicSystem + ?Sized,
    C: InvariantChart + ?Sized,
{
    let g = ChartGeometry::at(sys, chart, u)?;
    let b = sys.source(u);
    let lb = DVector::from_fn(g.others.len(), |a, _| g.dec.left[g.others[a]].dot(&b));
    Ok((&g.sigma * lb).iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseIRow {
    pub r: Vec<f64>,
    /// Mean of `S^α` over the `v` samples; the tabulated `F^α(R)`.
    pub f: Vec<f64>,
    pub variation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseIReport {
    /// Largest spread of `S^α` along `v` at fixed `R`.
    pub variation: f64,
    pub tol: f64,
    pub holds: bool,
    pub table: Vec<CaseIRow>,
}

impl CaseIReport {
    pub fn require(&self) -> Result<()> {
        if self.holds {
            Ok(())
        } else {
            Err(Error::StructuralConditionFailed {
                variation: self.variation,
                tol: self.tol,
            })
        }
    }
}

/// Evaluate `S^α` on the `(R, v)` grid `r_samples × v_samples` and report
/// how much it varies with `v`.
pub fn structural_case_i<S, C>(sys: &S, chart: &C, r_samples: &[Vec<f64>], v_samples: &[f64], tol: f64) -> Result<CaseIReport>
where
    S: HyperbolicSystem + ?Sized,
    C: InvariantChart + ?Sized,
{
    if v_samples.is_empty() || r_samples.is_empty() {
        return Err(Error::invalid("case (i) check needs at least one R and one v sample"));
    }
    let mut table = Vec::with_capacity(r_samples.len());
    let mut variation: f64 = 0.0;
    for r in r_samples {
        let values: Vec<Vec<f64>> = v_samples
            .iter()
            .map(|&v| {
                let u = chart.to_state(r, v).map_err(|e| Error::ChartEvaluation(e.to_string()))?;
                case_i_function(sys, chart, &u)
            })
            .collect::<Result<_>>()?;
        let m = values[0].len();
        let mut row_var: f64 = 0.0;
        let mut mean = vec![0.0; m];
        for a in 0..m {
            let (lo, hi) = values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s[a]), hi.max(s[a])));
            row_var = row_var.max(hi - lo);
            mean[a] = values.iter().map(|s| s[a]).sum::<f64>() / values.len() as f64;
        }
        variation = variation.max(row_var);
        table.push(CaseIRow {
            r: r.clone(),
            f: mean,
            variation: row_var,
        });
    }
    Ok(CaseIReport {
        variation,
        tol,
        holds: variation <= tol,
        table,
    })
}

/// `F^α(R) = S^α(U(R, v_ref))`, for use once the case (i) check passed.
pub fn case_i_source<'a, S, C>(sys: &'a S, chart: &'a C, v_ref: f64) -> impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'a
where
    S: HyperbolicSystem + ?Sized,
    C: InvariantChart + ?Sized,
{
    move |r: &[f64]| case_i_function(sys, chart, &chart.to_state(r, v_ref)?)
}

/// `∂G^α/∂R^β F^β − ∂F^α/∂R^β G^β` at `r`, by central differences.
pub fn lie_bracket_residual<F, G>(f: F, g: G, r: &[f64], probe: &ResidualProbe) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
    G: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = r.len();
    let fv = f(r)?;
    let gv = g(r)?;
    if fv.len() != m || gv.len() != m {
        return Err(Error::invalid("F and G must have one component per invariant"));
    }
    let jac = |h: &dyn Fn(&[f64]) -> Result<Vec<f64>>| -> Result<DMatrix<f64>> {
        let mut j = DMatrix::zeros(m, m);
        for b in 0..m {
            let e = probe.rel_step * r[b].abs().max(1.0);
            let mut up = r.to_vec();
            let mut dn = r.to_vec();
            up[b] += e;
            dn[b] -= e;
            let (hu, hd) = (h(&up)?, h(&dn)?);
            for a in 0..m {
                j[(a, b)] = (hu[a] - hd[a]) / (2.0 * e);
            }
        }
        Ok(j)
    };
    let jf = jac(&f)?;
    let jg = jac(&g)?;
    let fv = DVector::from_vec(fv);
    let gv = DVector::from_vec(gv);
    Ok((jg * fv - jf * gv).iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseIIPoint {
    pub state: Vec<f64>,
    pub r: Vec<f64>,
    /// `q^β` solving `σ q = G(R)`.
    pub q: Vec<f64>,
    /// `σ (l·B − λ q) − F(R)`.
    pub f_residual: Vec<f64>,
    /// `σ q − G(R)` after the solve (round-off only).
    pub g_residual: Vec<f64>,
    pub bracket: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseIIReport {
    pub max_f_residual: f64,
    pub max_g_residual: f64,
    pub max_bracket: f64,
    pub points: Vec<CaseIIPoint>,
}

impl CaseIIReport {
    pub fn max(&self) -> f64 {
        self.max_f_residual.max(self.max_g_residual).max(self.max_bracket)
    }
}

/// `q^β` from `σ^α_β q^β = G^α(R)` at `u`.
pub fn case_ii_constraints<S, C, G>(sys: &S, chart: &C, g: &G, u: &State) -> Result<Vec<f64>>
where
    S: HyperbolicSystem + ?Sized,
    C: InvariantChart + ?Sized,
    G: Fn(&[f64]) -> Result<Vec<f64>> + ?Sized,
{
    let geo = ChartGeometry::at(sys, chart, u)?;
    let r = chart.invariants(u)?;
    let gv = DVector::from_vec(g(&r)?);
    let q = geo
        .sigma
        .clone()
        .lu()
        .solve(&gv)
        .ok_or_else(|| Error::ChartEvaluation("sigma is singular; cannot solve for q".into()))?;
    Ok(q.iter().copied().collect())
}

/// Residuals of both case (ii) definitions and of the bracket condition at
/// the given states.
pub fn structural_case_ii<S, C, F, G>(
    sys: &S,
    chart: &C,
    f: &F,
    g: &G,
    states: &[State],
    probe: &ResidualProbe,
) -> Result<CaseIIReport>
where
    S: HyperbolicSystem + ?Sized,
    C: InvariantChart + ?Sized,
    F: Fn(&[f64]) -> Result<Vec<f64>> + ?Sized,
    G: Fn(&[f64]) -> Result<Vec<f64>> + ?Sized,
{
    let mut points = Vec::with_capacity(states.len());
    let (mut mf, mut mg, mut mb) = (0.0f64, 0.0f64, 0.0f64);
    for u in states {
        let geo = ChartGeometry::at(sys, chart, u)?;
        let r = chart.invariants(u)?;
        let q = DVector::from_vec(case_ii_constraints(sys, chart, g, u)?);
        let b = sys.source(u);
        let m = geo.others.len();
        let inner = DVector::from_fn(m, |a, _| {
            let beta = geo.others[a];
            geo.dec.left[beta].dot(&b) - geo.dec.lambdas[beta] * q[a]
        });
        let fr: Vec<f64> = (&geo.sigma * inner).iter().zip(f(&r)?).map(|(s, fv)| s - fv).collect();
        let gr: Vec<f64> = (&geo.sigma * &q).iter().zip(g(&r)?).map(|(s, gv)| s - gv).collect();
        let bracket = lie_bracket_residual(f, g, &r, probe)?;
        let amax = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        mf = mf.max(amax(&fr));
        mg = mg.max(amax(&gr));
        mb = mb.max(amax(&bracket));
        points.push(CaseIIPoint {
            state: u.iter().copied().collect(),
            r,
            q: q.iter().copied().collect(),
            f_residual: fr,
            g_residual: gr,
            bracket,
        });
    }
    Ok(CaseIIReport {
        max_f_residual: mf,
        max_g_residual: mg,
        max_bracket: mb,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::linspace;
    use crate::models::{BarotropicModel, ForceSpec, PressureLaw};
    use nalgebra::dvector;

    fn grid_r() -> Vec<Vec<f64>> {
        linspace(-0.5, 0.5, 5).into_iter().map(|r| vec![r]).collect()
    }

    #[test]
    fn homogeneous_case_i_holds_with_zero_table() {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 2.0), ForceSpec::None);
        let chart = m.chart(1, 0).unwrap();
        let rep = structural_case_i(&m, &chart, &grid_r(), &linspace(0.5, 2.0, 7), 1e-12).unwrap();
        assert!(rep.holds);
        assert!(rep.table.iter().all(|row| row.f[0] == 0.0));
    }

    #[test]
    fn density_only_force_fails_case_i() {
        let m = BarotropicModel::new(
            PressureLaw::polytropic(1.0, 2.0),
            ForceSpec::custom("rho", |rho, _| -0.3 * rho),
        );
        let chart = m.chart(1, 0).unwrap();
        let rep = structural_case_i(&m, &chart, &grid_r(), &linspace(0.5, 2.0, 7), 1e-8).unwrap();
        assert!(!rep.holds);
        assert!(rep.variation > 0.1);
        assert!(matches!(rep.require(), Err(Error::StructuralConditionFailed { .. })));
    }

    #[test]
    fn force_pushed_through_chart_passes() {
        // for the u + c family S = f, so f = F(u − Φ(ρ)) is a function of R
        let law = PressureLaw::polytropic(1.0, 2.0);
        let l2 = law.clone();
        let m = BarotropicModel::new(
            law,
            ForceSpec::custom("F(R)", move |rho, u| {
                let r = u - l2.riemann_integral(rho).unwrap();
                -0.4 * r + 0.1 * r * r
            }),
        );
        let chart = m.chart(1, 0).unwrap();
        let rep = structural_case_i(&m, &chart, &grid_r(), &linspace(0.5, 2.0, 7), 1e-8).unwrap();
        assert!(rep.holds, "variation {}", rep.variation);
        let src = case_i_source(&m, &chart, 1.0);
        let r = 0.3;
        assert!((src(&[r]).unwrap()[0] - (-0.4 * r + 0.1 * r * r)).abs() < 1e-12);
    }

    #[test]
    fn bracket_of_proportional_fields_vanishes() {
        let f = |r: &[f64]| Ok(vec![r[0].sin(), r[0] * r[1]]);
        let g = |r: &[f64]| Ok(vec![2.5 * r[0].sin(), 2.5 * r[0] * r[1]]);
        let b = lie_bracket_residual(f, g, &[0.3, -1.2], &ResidualProbe::default()).unwrap();
        assert!(b.iter().all(|v| v.abs() < 1e-9), "{b:?}");
    }

    #[test]
    fn bracket_matches_hand_expansion() {
        // F = R, G = R²: G' F − F' G = 2R·R − R² = R²
        let f = |r: &[f64]| Ok(vec![r[0]]);
        let g = |r: &[f64]| Ok(vec![r[0] * r[0]]);
        for r in [0.5, -1.3, 2.0] {
            let b = lie_bracket_residual(f, g, &[r], &ResidualProbe::default()).unwrap();
            assert!((b[0] - r * r).abs() < 1e-8);
        }
        let zero = |_: &[f64]| Ok(vec![0.0]);
        let b = lie_bracket_residual(zero, g, &[0.7], &ResidualProbe::default()).unwrap();
        assert_eq!(b[0], 0.0);
    }

    #[test]
    fn case_ii_definitions_on_barotropic() {
        let m = BarotropicModel::new(PressureLaw::isothermal(1.0), ForceSpec::None);
        let chart = m.chart(1, 0).unwrap();
        // with B = 0: σ(−λ^1 q) = F and σ q = G ⇒ F = −λ^1 G; pick G = 0
        let zero = |_: &[f64]| Ok(vec![0.0]);
        let rep = structural_case_ii(
            &m,
            &chart,
            &zero,
            &zero,
            &[dvector![1.0, 0.2], dvector![2.0, -0.3]],
            &ResidualProbe::default(),
        )
        .unwrap();
        assert!(rep.max() < 1e-14);
    }
}
