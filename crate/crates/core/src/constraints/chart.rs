//! Riemann-invariant charts `U ↔ (R^α, v)` for one distinguished family.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};
use crate::spectral::{decompose, SpectralDecomposition};
use crate::system::{HyperbolicSystem, State};

/// Coordinates `(R^1 … R^{N−1}, v = u_j)` adapted to family `family`:
/// every `R^α` is constant along the right eigenvector `d^family`.
pub trait InvariantChart: Send + Sync {
    fn dim(&self) -> usize;

    /// The distinguished family (0-based, ascending speed order).
    fn family(&self) -> usize;

    /// Index `j` of the retained coordinate `v = u_j`.
    fn retained(&self) -> usize;

    fn invariants(&self, u: &State) -> Result<Vec<f64>>;

    /// Rows `∇R^α`, an `(N−1) × N` matrix.
    fn invariant_gradients(&self, u: &State) -> Result<DMatrix<f64>>;

    /// Inverse chart `U(R, v)`.
    fn to_state(&self, r: &[f64], v: f64) -> Result<State>;
}

impl<C: InvariantChart + ?Sized> InvariantChart for &C {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn family(&self) -> usize {
        (**self).family()
    }
    fn retained(&self) -> usize {
        (**self).retained()
    }
    fn invariants(&self, u: &State) -> Result<Vec<f64>> {
        (**self).invariants(u)
    }
    fn invariant_gradients(&self, u: &State) -> Result<DMatrix<f64>> {
        (**self).invariant_gradients(u)
    }
    fn to_state(&self, r: &[f64], v: f64) -> Result<State> {
        (**self).to_state(r, v)
    }
}

impl<C: InvariantChart + ?Sized> InvariantChart for Arc<C> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn family(&self) -> usize {
        (**self).family()
    }
    fn retained(&self) -> usize {
        (**self).retained()
    }
    fn invariants(&self, u: &State) -> Result<Vec<f64>> {
        (**self).invariants(u)
    }
    fn invariant_gradients(&self, u: &State) -> Result<DMatrix<f64>> {
        (**self).invariant_gradients(u)
    }
    fn to_state(&self, r: &[f64], v: f64) -> Result<State> {
        (**self).to_state(r, v)
    }
}

/// Everything the compatibility evaluators need from a chart at one state.
#[derive(Debug, Clone)]
pub struct ChartGeometry {
    pub dec: SpectralDecomposition,
    /// The non-distinguished families `β`, ascending.
    pub others: Vec<usize>,
    /// `∇R^α`, `(N−1) × N`.
    pub gradients: DMatrix<f64>,
    /// `σ^α_β = ∇R^α · d^β`, so that `∇R^α = σ^α_β l^β`.
    pub sigma: DMatrix<f64>,
    /// `∂U/∂v` at fixed `R`: `d^N / d^N_j`.
    pub v_direction: State,
    /// Columns `∂U/∂R^γ` at fixed `v`.
    pub r_directions: DMatrix<f64>,
    /// Determinant of `∂(R, v)/∂U`.
    pub det: f64,
}

impl ChartGeometry {
    pub fn at<S, C>(sys: &S, chart: &C, u: &State) -> Result<Self>
    where
        S: HyperbolicSystem + ?Sized,
        C: InvariantChart + ?Sized,
    {
        let n = sys.dim();
        let (family, j) = (chart.family(), chart.retained());
        if chart.dim() != n || family >= n || j >= n {
            return Err(Error::ChartEvaluation(format!(
                "chart (dim {}, family {family}, retained {j}) does not fit a system of dimension {n}",
                chart.dim()
            )));
        }
        let dec = decompose(sys, u)?;
        let gradients = chart.invariant_gradients(u)?;
        if gradients.nrows() != n - 1 || gradients.ncols() != n {
            return Err(Error::ChartEvaluation(format!(
                "invariant gradients are {}x{}, expected {}x{n}",
                gradients.nrows(),
                gradients.ncols(),
                n - 1
            )));
        }
        let others: Vec<usize> = (0..n).filter(|&i| i != family).collect();
        let sigma = DMatrix::from_fn(n - 1, n - 1, |a, b| gradients.row(a).dot(&dec.right[others[b]].transpose()));

        let dn = &dec.right[family];
        if dn[j].abs() < 1e-12 * dn.amax() {
            return Err(Error::ChartEvaluation(format!(
                "retained coordinate u_{j} does not vary along the distinguished family"
            )));
        }
        let v_direction = dn / dn[j];

        let mut jac = DMatrix::zeros(n, n);
        jac.rows_mut(0, n - 1).copy_from(&gradients);
        jac[(n - 1, j)] = 1.0;
        let det = jac.determinant();
        let inv = jac
            .try_inverse()
            .ok_or_else(|| Error::ChartEvaluation("chart Jacobian is singular".into()))?;
        let r_directions = inv.columns(0, n - 1).into_owned();
        Ok(Self {
            dec,
            others,
            gradients,
            sigma,
            v_direction,
            r_directions,
            det,
        })
    }
}

/// Largest `|∇R^α · d^N|` (relative to `|∇R^α|`) and smallest chart
/// determinant over the sample states.
pub fn chart_defects<S, C>(sys: &S, chart: &C, states: &[State]) -> Result<(f64, f64)>
where
    S: HyperbolicSystem + ?Sized,
    C: InvariantChart + ?Sized,
{
    let mut orth: f64 = 0.0;
    let mut det = f64::INFINITY;
    for u in states {
        let g = ChartGeometry::at(sys, chart, u)?;
        let dn = &g.dec.right[chart.family()];
        let dn = dn / dn.norm();
        for a in 0..g.gradients.nrows() {
            let row = g.gradients.row(a);
            orth = orth.max((row * &dn)[0].abs() / row.norm().max(f64::MIN_POSITIVE));
        }
        det = det.min(g.det.abs());
    }
    Ok((orth, det))
}

/// Check the chart invariants: `∇R·d^N = 0` within `1e-9` and `|det| > 1e-10`.
pub fn validate_chart<S, C>(sys: &S, chart: &C, states: &[State]) -> Result<()>
where
    S: HyperbolicSystem + ?Sized,
    C: InvariantChart + ?Sized,
{
    let (orth, det) = chart_defects(sys, chart, states)?;
    if orth > 1e-9 {
        return Err(Error::ChartEvaluation(format!("grad R . d^N = {orth:e} exceeds 1e-9")));
    }
    if det <= 1e-10 {
        return Err(Error::ChartEvaluation(format!(
            "chart Jacobian determinant {det:e} is too small"
        )));
    }
    Ok(())
}

/// Riemann invariant of a 2×2 system computed by quadrature of the integral
/// curves of `d^family`.
///
/// With `k` the first component of `d^family` that is significant (at least
/// a tenth of the largest) at the seed and
/// `o` the other one, the integral curve through `U` solves
/// `du_o/du_k = d_o/d_k`; `R(U)` is its `u_o` value at `u_k = ref_k`, minus
/// `ref_o`, so `R(reference) = 0`. The retained coordinate is `v = u_k`.
#[derive(Clone)]
pub struct QuadratureChart<S> {
    sys: S,
    family: usize,
    k: usize,
    o: usize,
    reference: State,
    opts: OdeOptions,
}

impl<S> std::fmt::Debug for QuadratureChart<S> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadratureChart")
            .field("family", &self.family)
            .field("k", &self.k)
            .field("reference", &self.reference.as_slice())
            .finish()
    }
}

/// Build the quadrature chart of `family` around `seed` (N = 2 only; larger
/// systems need user-supplied invariants).
pub fn riemann_chart<S: HyperbolicSystem>(sys: S, family: usize, seed: &State) -> Result<QuadratureChart<S>> {
    if sys.dim() != 2 {
        return Err(Error::invalid(format!(
            "automatic Riemann invariants need N = 2 (got {}); supply an InvariantChart instead",
            sys.dim()
        )));
    }
    if family > 1 {
        return Err(Error::invalid("family must be 0 or 1"));
    }
    let dec = decompose(&sys, seed)?;
    let d = &dec.right[family];
    let k = if d[0].abs() >= 0.1 * d.amax() { 0 } else { 1 };
    Ok(QuadratureChart {
        sys,
        family,
        k,
        o: 1 - k,
        reference: seed.clone(),
        opts: OdeOptions::with_tolerances(1e-12, 1e-14),
    })
}

impl<S: HyperbolicSystem> QuadratureChart<S> {
    /// Move the zero of `R` to the integral curve through `reference`.
    pub fn with_reference(mut self, reference: State) -> Self {
        self.reference = reference;
        self
    }

    pub fn reference(&self) -> &State {
        &self.reference
    }

    fn state(&self, uk: f64, uo: f64) -> State {
        let mut u = State::zeros(2);
        u[self.k] = uk;
        u[self.o] = uo;
        u
    }

    /// Slope `h = d_o / d_k` of the integral curves.
    fn slope(&self, uk: f64, uo: f64) -> Result<f64> {
        let dec = decompose(&self.sys, &self.state(uk, uo))?;
        let d = &dec.right[self.family];
        if d[self.k].abs() < 1e-14 * d.amax() {
            return Err(Error::QuadratureFailure(format!(
                "integral curve turns parallel to u_{} at ({uk}, {uo})",
                self.o
            )));
        }
        Ok(d[self.o] / d[self.k])
    }

    /// Follow the curve through `(uk, uo)` to `u_k = target`.
    fn follow(&self, uk: f64, uo: f64, target: f64) -> Result<f64> {
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = self.slope(t, y[0])?;
            Ok(())
        };
        let sol = integrate(rhs, uk, &[uo], target, &self.opts).map_err(|e| Error::QuadratureFailure(e.to_string()))?;
        Ok(sol.final_state()[0])
    }

    /// As [`Self::follow`], also carrying the sensitivity
    /// `∂u_o(target)/∂u_o(start)`.
    fn follow_with_sensitivity(&self, uk: f64, uo: f64, target: f64) -> Result<(f64, f64)> {
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let h = self.slope(t, y[0])?;
            let e = 1e-6 * y[0].abs().max(1.0);
            let dh = (self.slope(t, y[0] + e)? - self.slope(t, y[0] - e)?) / (2.0 * e);
            dy[0] = h;
            dy[1] = dh * y[1];
            Ok(())
        };
        let sol = integrate(rhs, uk, &[uo, 1.0], target, &self.opts).map_err(|e| Error::QuadratureFailure(e.to_string()))?;
        let y = sol.final_state();
        Ok((y[0], y[1]))
    }
}

impl<S: HyperbolicSystem> InvariantChart for QuadratureChart<S> {
    fn dim(&self) -> usize {
        2
    }

    fn family(&self) -> usize {
        self.family
    }

    fn retained(&self) -> usize {
        self.k
    }

    fn invariants(&self, u: &State) -> Result<Vec<f64>> {
        self.sys.check_admissible(u)?;
        let uo = self.follow(u[self.k], u[self.o], self.reference[self.k])?;
        Ok(vec![uo - self.reference[self.o]])
    }

    fn invariant_gradients(&self, u: &State) -> Result<DMatrix<f64>> {
        let (_, y) = self.follow_with_sensitivity(u[self.k], u[self.o], self.reference[self.k])?;
        let h = self.slope(u[self.k], u[self.o])?;
        let mut g = DMatrix::zeros(1, 2);
        g[(0, self.o)] = y;
        g[(0, self.k)] = -h * y;
        Ok(g)
    }

    fn to_state(&self, r: &[f64], v: f64) -> Result<State> {
        let uo = self.follow(self.reference[self.k], r[0] + self.reference[self.o], v)?;
        let u = self.state(v, uo);
        self.sys
            .check_admissible(&u)
            .map_err(|e| Error::ChartEvaluation(e.to_string()))?;
        Ok(u)
    }
}

/// Invariants supplied as closures, for systems where quadrature is not
/// available (N > 2) or a closed form is known.
#[derive(Clone)]
pub struct ClosureChart {
    pub dim: usize,
    pub family: usize,
    pub retained: usize,
    #[allow(clippy::type_complexity)]
    pub invariants: Arc<dyn Fn(&State) -> Result<Vec<f64>> + Send + Sync>,
    #[allow(clippy::type_complexity)]
    pub gradients: Arc<dyn Fn(&State) -> Result<DMatrix<f64>> + Send + Sync>,
    #[allow(clippy::type_complexity)]
    pub inverse: Arc<dyn Fn(&[f64], f64) -> Result<State> + Send + Sync>,
}

impl InvariantChart for ClosureChart {
    fn dim(&self) -> usize {
        self.dim
    }
    fn family(&self) -> usize {
        self.family
    }
    fn retained(&self) -> usize {
        self.retained
    }
    fn invariants(&self, u: &State) -> Result<Vec<f64>> {
        (self.invariants)(u)
    }
    fn invariant_gradients(&self, u: &State) -> Result<DMatrix<f64>> {
        (self.gradients)(u)
    }
    fn to_state(&self, r: &[f64], v: f64) -> Result<State> {
        (self.inverse)(r, v)
    }
}

/// Chart of a system whose distinguished family is a coordinate direction:
/// `d^family ∥ e_j`, invariants are the other coordinates, `v = u_j`.
pub fn coordinate_chart(dim: usize, family: usize, retained: usize) -> ClosureChart {
    let others: Vec<usize> = (0..dim).filter(|&i| i != retained).collect();
    let (o1, o2) = (others.clone(), others.clone());
    ClosureChart {
        dim,
        family,
        retained,
        invariants: Arc::new(move |u: &State| Ok(o1.iter().map(|&i| u[i]).collect())),
        gradients: Arc::new(move |_u: &State| {
            let mut g = DMatrix::zeros(dim - 1, dim);
            for (a, &i) in o2.iter().enumerate() {
                g[(a, i)] = 1.0;
            }
            Ok(g)
        }),
        inverse: Arc::new(move |r: &[f64], v: f64| {
            let mut u = DVector::zeros(dim);
            for (a, &i) in others.iter().enumerate() {
                u[i] = r[a];
            }
            u[retained] = v;
            Ok(u)
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BarotropicModel, ForceSpec, PressureLaw};
    use crate::system::GenericSystem;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn polytropic_quadrature_matches_closed_form() {
        let gamma = 1.4;
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, gamma), ForceSpec::None);
        let chart = riemann_chart(m.clone(), 1, &dvector![1.0, 0.0]).unwrap();
        let exact = |u: &State| u[1] - 2.0 * m.sound_speed(u[0]).unwrap() / (gamma - 1.0);
        let base = dvector![1.0, 0.0];
        for u in [dvector![0.5, 0.2], dvector![2.0, -1.0], dvector![1.3, 0.7]] {
            let r = chart.invariants(&u).unwrap()[0];
            assert!((r - (exact(&u) - exact(&base))).abs() < 1e-9, "{r}");
            let g = chart.invariant_gradients(&u).unwrap();
            let d = &m.eigenstructure(u[0], u[1]).unwrap().right[1];
            assert!((g.row(0) * d)[0].abs() < 1e-9);
        }
    }

    #[test]
    fn isothermal_invariant_and_inverse() {
        let m = BarotropicModel::new(PressureLaw::isothermal(0.8), ForceSpec::None);
        let chart = riemann_chart(m, 1, &dvector![1.0, 0.0]).unwrap();
        let u = dvector![3.0, 0.4];
        let r = chart.invariants(&u).unwrap();
        assert!((r[0] - (0.4 - 0.8 * 3f64.ln())).abs() < 1e-10);
        let back = chart.to_state(&r, u[chart.retained()]).unwrap();
        assert!((back - u).amax() < 1e-9);
    }

    #[test]
    fn diagonal_constant_speeds_give_coordinate_invariant() {
        let sys = GenericSystem::diagonal(vec![1.0, 2.0], |_| dvector![0.0, 0.0]);
        let chart = riemann_chart(sys.clone(), 1, &dvector![0.0, 0.0]).unwrap();
        let r = chart.invariants(&dvector![0.7, -3.0]).unwrap();
        assert!((r[0] - 0.7).abs() < 1e-14);
        validate_chart(&sys, &chart, &[dvector![0.7, -3.0]]).unwrap();
    }

    #[test]
    fn geometry_sigma_reconstructs_gradient() {
        let m = BarotropicModel::flagship();
        let chart = m.chart(1, 1).unwrap();
        let u = dvector![1.5, 0.3];
        let g = ChartGeometry::at(&m, &chart, &u).unwrap();
        let rebuilt = g.sigma[(0, 0)] * g.dec.left[0].transpose();
        assert!((rebuilt - &g.gradients).amax() < 1e-14);
        // ∂U/∂R and ∂U/∂v are dual to the chart coordinates
        assert!((g.gradients.row(0) * &g.v_direction)[0].abs() < 1e-14);
        assert!(((g.gradients.row(0) * g.r_directions.column(0))[0] - 1.0).abs() < 1e-14);
        assert_eq!(g.r_directions[(1, 0)], 0.0);
    }

    #[test]
    fn rejects_large_systems() {
        let sys = GenericSystem::diagonal(vec![1.0, 2.0, 3.0], |_| dvector![0.0, 0.0, 0.0]);
        assert!(riemann_chart(sys, 0, &dvector![0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn coordinate_chart_round_trip() {
        let c = coordinate_chart(3, 2, 1);
        let u = dvector![1.0, 2.0, 3.0];
        let r = c.invariants(&u).unwrap();
        assert_eq!(r, vec![1.0, 3.0]);
        assert_eq!(c.to_state(&r, 2.0).unwrap(), u);
        assert_eq!(c.invariant_gradients(&u).unwrap(), dmatrix![1.0, 0.0, 0.0; 0.0, 0.0, 1.0]);
    }
}
