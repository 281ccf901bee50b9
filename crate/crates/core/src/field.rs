//! Solutions `U(x, t)` as evaluable objects, and sampled grids of them.

use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::system::State;

/// A solution that can be evaluated pointwise.
pub trait SolutionField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: f64, t: f64) -> Result<State>;

    /// `(U_x, U_t)` in closed form, if the field has one.
    fn analytic_derivatives(&self, _x: f64, _t: f64) -> Option<Result<(State, State)>> {
        None
    }
}

impl<F: SolutionField + ?Sized> SolutionField for &F {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: f64, t: f64) -> Result<State> {
        (**self).eval(x, t)
    }
    fn analytic_derivatives(&self, x: f64, t: f64) -> Option<Result<(State, State)>> {
        (**self).analytic_derivatives(x, t)
    }
}

/// Uniformly spaced points `lo..=hi`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Regular `x × t` grid of state values, plus optional named auxiliary
/// arrays (residuals) on the same grid.
///
/// Values are stored row-major by time: index `it * nx + ix`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub components: Vec<String>,
    pub(crate) state: Vec<Vec<f64>>,
    pub auxiliary: Vec<(String, Vec<f64>)>,
    pub metadata: Map<String, Value>,
}

impl GridField {
    pub fn new(xs: Vec<f64>, ts: Vec<f64>, components: Vec<String>, state: Vec<Vec<f64>>) -> Result<Self> {
        let g = Self {
            xs,
            ts,
            components,
            state,
            auxiliary: Vec::new(),
            metadata: Map::new(),
        };
        g.validate()?;
        Ok(g)
    }

    /// Sample `field` on `xs × ts`, rows in parallel.
    pub fn sample<F: SolutionField + ?Sized>(field: &F, xs: &[f64], ts: &[f64], components: Vec<String>) -> Result<Self> {
        let nc = field.dim();
        if components.len() != nc {
            return Err(Error::invalid("component names do not match field dimension"));
        }
        let rows: Vec<Vec<State>> = ts
            .par_iter()
            .map(|&t| xs.iter().map(|&x| field.eval(x, t)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let mut state = vec![Vec::with_capacity(xs.len() * ts.len()); nc];
        for row in &rows {
            for u in row {
                for (c, col) in state.iter_mut().enumerate() {
                    col.push(u[c]);
                }
            }
        }
        Self::new(xs.to_vec(), ts.to_vec(), components, state)
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn nt(&self) -> usize {
        self.ts.len()
    }

    pub fn index(&self, ix: usize, it: usize) -> usize {
        it * self.nx() + ix
    }

    pub fn value(&self, ix: usize, it: usize) -> State {
        let k = self.index(ix, it);
        State::from_iterator(self.components.len(), self.state.iter().map(|col| col[k]))
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.state[c]
    }

    pub fn push_auxiliary(&mut self, name: impl Into<String>, data: Vec<f64>) -> Result<()> {
        if data.len() != self.nx() * self.nt() {
            return Err(Error::invalid("auxiliary array has wrong length"));
        }
        self.auxiliary.push((name.into(), data));
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("x", &self.xs), ("t", &self.ts)] {
            if axis.is_empty() {
                return Err(Error::invalid(format!("{name} axis is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("{name} axis has non-finite entries")));
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid(format!("{name} axis is not strictly increasing")));
            }
        }
        if self.components.is_empty() {
            return Err(Error::invalid("field has no components"));
        }
        if self.state.len() != self.components.len() {
            return Err(Error::invalid("component arrays do not match component names"));
        }
        let n = self.nx() * self.nt();
        if self.state.iter().any(|c| c.len() != n) || self.auxiliary.iter().any(|(_, a)| a.len() != n) {
            return Err(Error::invalid(format!("array length differs from grid size {n}")));
        }
        Ok(())
    }

    fn locate(axis: &[f64], v: f64) -> Option<(usize, f64)> {
        let (lo, hi) = (axis[0], *axis.last()?);
        if v < lo || v > hi || !v.is_finite() {
            return None;
        }
        if axis.len() == 1 {
            return Some((0, 0.0));
        }
        let i = axis.partition_point(|&a| a <= v).clamp(1, axis.len() - 1) - 1;
        Some((i, (v - axis[i]) / (axis[i + 1] - axis[i])))
    }
}

/// Bilinear interpolation inside the grid.
impl SolutionField for GridField {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn eval(&self, x: f64, t: f64) -> Result<State> {
        let (ix, fx) = Self::locate(&self.xs, x).ok_or(Error::OutsideDomain { x, t })?;
        let (it, ft) = Self::locate(&self.ts, t).ok_or(Error::OutsideDomain { x, t })?;
        let ix1 = (ix + 1).min(self.nx() - 1);
        let it1 = (it + 1).min(self.nt() - 1);
        let v00 = self.value(ix, it);
        let v10 = self.value(ix1, it);
        let v01 = self.value(ix, it1);
        let v11 = self.value(ix1, it1);
        Ok(v00 * ((1.0 - fx) * (1.0 - ft)) + v10 * (fx * (1.0 - ft)) + v01 * ((1.0 - fx) * ft) + v11 * (fx * ft))
    }
}
