//! PDE residuals `U_t + A(U) U_x − B(U)` of solution fields, and field differences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{GridField, SolutionField};
use crate::system::{HyperbolicSystem, State};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DerivativeMode {
    /// Closed-form `(U_x, U_t)` from the field.
    Analytic,
    /// Second-order central differences of `field.eval` with these steps.
    CentralDifference { hx: f64, ht: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentStats {
    pub name: String,
    pub max: f64,
    /// Root mean square over the evaluated points.
    pub rms: f64,
    pub argmax: (f64, f64),
}

/// Max / RMS summary of a pointwise quantity over a set of `(x, t)` points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub components: Vec<ComponentStats>,
    pub max: f64,
    pub rms: f64,
    pub points: usize,
}

impl ResidualReport {
    /// Builds a report from per-point values `(x, t, |r_c|)`.
    pub fn from_points(names: &[String], samples: &[(f64, f64, Vec<f64>)]) -> Self {
        let mut components: Vec<ComponentStats> = names
            .iter()
            .map(|n| ComponentStats {
                name: n.clone(),
                max: 0.0,
                rms: 0.0,
                argmax: (f64::NAN, f64::NAN),
            })
            .collect();
        for (x, t, r) in samples {
            for (c, v) in components.iter_mut().zip(r) {
                let a = v.abs();
                // NaN must surface as a failure
                if a > c.max || a.is_nan() {
                    c.max = if a.is_nan() { f64::INFINITY } else { a };
                    c.argmax = (*x, *t);
                }
                c.rms += a * a;
            }
        }
        let n = samples.len().max(1) as f64;
        let mut total = 0.0;
        for c in &mut components {
            total += c.rms;
            c.rms = (c.rms / n).sqrt();
        }
        let max = components.iter().map(|c| c.max).fold(0.0, f64::max);
        Self {
            rms: (total / (n * components.len().max(1) as f64)).sqrt(),
            max,
            points: samples.len(),
            components,
        }
    }

    pub fn component(&self, name: &str) -> Option<&ComponentStats> {
        self.components.iter().find(|c| c.name == name)
    }
}

fn equation_names<S: HyperbolicSystem + ?Sized>(sys: &S) -> Vec<String> {
    sys.component_names().iter().map(|n| format!("eq_{n}")).collect()
}

/// Pointwise residual `U_t + A(U) U_x − B(U)`.
pub fn residual_at<S, F>(sys: &S, field: &F, x: f64, t: f64, mode: DerivativeMode) -> Result<State>
where
    S: HyperbolicSystem + ?Sized,
    F: SolutionField + ?Sized,
{
    let u = field.eval(x, t)?;
    let (ux, ut) = match mode {
        DerivativeMode::Analytic => field.analytic_derivatives(x, t).ok_or(Error::MissingAnalyticJacobian {
            what: "field derivatives",
        })??,
        DerivativeMode::CentralDifference { hx, ht } => {
            let ux = (field.eval(x + hx, t)? - field.eval(x - hx, t)?) / (2.0 * hx);
            let ut = (field.eval(x, t + ht)? - field.eval(x, t - ht)?) / (2.0 * ht);
            (ux, ut)
        }
    };
    Ok(ut + sys.matrix(&u) * ux - sys.source(&u))
}

/// Residual of `field` at every point of `xs × ts`.
pub fn pde_residual<S, F>(sys: &S, field: &F, xs: &[f64], ts: &[f64], mode: DerivativeMode) -> Result<ResidualReport>
where
    S: HyperbolicSystem + ?Sized,
    F: SolutionField + ?Sized,
{
    let points: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (x, t))).collect();
    let samples: Vec<(f64, f64, Vec<f64>)> = points
        .par_iter()
        .map(|&(x, t)| residual_at(sys, field, x, t, mode).map(|r| (x, t, r.iter().copied().collect())))
        .collect::<Result<_>>()?;
    Ok(ResidualReport::from_points(&equation_names(sys), &samples))
}

/// Second-order derivative weights on a nonuniform three-point stencil.
fn stencil(xm: f64, x0: f64, xp: f64) -> (f64, f64, f64) {
    let (hm, hp) = (x0 - xm, xp - x0);
    let denom = hm * hp * (hm + hp);
    (-hp * hp / denom, (hp * hp - hm * hm) / denom, hm * hm / denom)
}

/// Residual of a stored grid with O(h²) differences at interior grid points.
/// Returns the report and the full residual arrays (zero on the boundary).
pub fn grid_pde_residual<S: HyperbolicSystem + ?Sized>(sys: &S, grid: &GridField) -> Result<(ResidualReport, Vec<Vec<f64>>)> {
    let (nx, nt) = (grid.nx(), grid.nt());
    if nx < 3 || nt < 3 {
        return Err(Error::invalid("grid needs at least 3 points in x and t for residuals"));
    }
    if grid.components.len() != sys.dim() {
        return Err(Error::invalid("grid components do not match the system dimension"));
    }
    let n = sys.dim();
    let mut arrays = vec![vec![0.0; nx * nt]; n];
    let rows: Vec<Vec<(usize, f64, f64, Vec<f64>)>> = (1..nt - 1)
        .into_par_iter()
        .map(|it| {
            (1..nx - 1)
                .map(|ix| {
                    let u = grid.value(ix, it);
                    let (wm, w0, wp) = stencil(grid.xs[ix - 1], grid.xs[ix], grid.xs[ix + 1]);
                    let ux = grid.value(ix - 1, it) * wm + &u * w0 + grid.value(ix + 1, it) * wp;
                    let (vm, v0, vp) = stencil(grid.ts[it - 1], grid.ts[it], grid.ts[it + 1]);
                    let ut = grid.value(ix, it - 1) * vm + &u * v0 + grid.value(ix, it + 1) * vp;
                    sys.check_admissible(&u)?;
                    let r = ut + sys.matrix(&u) * ux - sys.source(&u);
                    Ok((grid.index(ix, it), grid.xs[ix], grid.ts[it], r.iter().copied().collect()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut samples = Vec::with_capacity((nx - 2) * (nt - 2));
    for (k, x, t, r) in rows.into_iter().flatten() {
        for c in 0..n {
            arrays[c][k] = r[c];
        }
        samples.push((x, t, r));
    }
    Ok((ResidualReport::from_points(&equation_names(sys), &samples), arrays))
}

/// Pointwise difference of two fields over `xs × ts`.
pub fn field_difference<A, B>(a: &A, b: &B, xs: &[f64], ts: &[f64], names: &[String]) -> Result<ResidualReport>
where
    A: SolutionField + ?Sized,
    B: SolutionField + ?Sized,
{
    if a.dim() != b.dim() {
        return Err(Error::invalid(format!("fields have dimensions {} and {}", a.dim(), b.dim())));
    }
    let points: Vec<(f64, f64)> = ts.iter().flat_map(|&t| xs.iter().map(move |&x| (x, t))).collect();
    let samples: Vec<(f64, f64, Vec<f64>)> = points
        .par_iter()
        .map(|&(x, t)| Ok((x, t, (a.eval(x, t)? - b.eval(x, t)?).iter().copied().collect())))
        .collect::<Result<_>>()?;
    Ok(ResidualReport::from_points(names, &samples))
}

/// Difference of two grids on the same axes.
pub fn grid_difference(a: &GridField, b: &GridField) -> Result<ResidualReport> {
    if a.xs != b.xs || a.ts != b.ts || a.components != b.components {
        return Err(Error::invalid("grids differ in axes or components"));
    }
    let mut samples = Vec::with_capacity(a.nx() * a.nt());
    for it in 0..a.nt() {
        for ix in 0..a.nx() {
            let d = a.value(ix, it) - b.value(ix, it);
            samples.push((a.xs[ix], a.ts[it], d.iter().copied().collect()));
        }
    }
    Ok(ResidualReport::from_points(&a.components, &samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::linspace;
    use crate::system::GenericSystem;

    /// u = sin(x − 2t) solves u_t + 2 u_x = 0.
    struct Wave;
    impl SolutionField for Wave {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, x: f64, t: f64) -> Result<State> {
            Ok(State::from_element(1, (x - 2.0 * t).sin()))
        }
        fn analytic_derivatives(&self, x: f64, t: f64) -> Option<Result<(State, State)>> {
            let c = (x - 2.0 * t).cos();
            Some(Ok((State::from_element(1, c), State::from_element(1, -2.0 * c))))
        }
    }

    fn advection() -> GenericSystem {
        GenericSystem::scalar(|_| 2.0, |_| 0.0)
    }

    #[test]
    fn exact_solution_has_zero_analytic_residual() {
        let r = pde_residual(
            &advection(),
            &Wave,
            &linspace(0.0, 1.0, 11),
            &linspace(0.0, 1.0, 5),
            DerivativeMode::Analytic,
        )
        .unwrap();
        assert!(r.max < 1e-15);
        assert_eq!(r.points, 55);
    }

    #[test]
    fn grid_residual_is_second_order() {
        let err = |n: usize| {
            let g = GridField::sample(&Wave, &linspace(0.0, 1.0, n), &linspace(0.0, 1.0, n), vec!["u".into()]).unwrap();
            grid_pde_residual(&advection(), &g).unwrap().0.max
        };
        let order = (err(21) / err(41)).log2();
        assert!((order - 2.0).abs() < 0.15, "order {order}");
    }

    #[test]
    fn nonuniform_stencil_is_exact_for_quadratics() {
        let (wm, w0, wp) = stencil(0.0, 0.3, 1.0);
        let f = |x: f64| 3.0 * x * x - x + 2.0;
        let d = wm * f(0.0) + w0 * f(0.3) + wp * f(1.0);
        assert!((d - (6.0 * 0.3 - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn self_difference_is_zero() {
        let xs = linspace(0.0, 1.0, 7);
        let r = field_difference(&Wave, &Wave, &xs, &xs, &["u".into()]).unwrap();
        assert_eq!(r.max, 0.0);
    }
}
