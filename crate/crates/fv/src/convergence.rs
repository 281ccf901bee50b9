use gtw_core::{HyperbolicSystem, SolutionField};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::GridSpec;
use crate::scheme::{advance, ErrorNorms, Scheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub h: f64,
    pub steps: usize,
    pub errors: ErrorNorms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub scheme: Scheme,
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `log L2` against `log h`; `None` when skipped.
    pub order: Option<f64>,
    /// Set when every error is at round-off level and no order was fitted.
    pub at_machine_precision: bool,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("cells,h,steps,l1,l2,linf\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.cells, r.h, r.steps, r.errors.l1, r.errors.l2, r.errors.linf
            ));
        }
        s
    }
}

/// Slope of the least-squares line through `(log x, log y)`.
pub(crate) fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Run `scheme` on every cell count of `ladder` from the exact initial
/// data and compare with `exact` at `base.t_end`.
pub fn convergence_study<S, F>(sys: &S, exact: &F, base: &GridSpec, ladder: &[usize], scheme: Scheme) -> Result<ConvergenceTable>
where
    S: HyperbolicSystem + ?Sized,
    F: SolutionField + ?Sized,
{
    let mut rows = Vec::with_capacity(ladder.len());
    for &cells in ladder {
        let spec = base.with_cells(cells);
        let run = advance(sys, &spec.sample(exact, 0.0)?, &spec, scheme)?;
        rows.push(ConvergenceRow {
            cells,
            h: spec.dx(),
            steps: run.steps,
            errors: run.errors(exact)?,
        });
    }
    let roundoff = rows.iter().all(|r| r.errors.linf <= 1e-13);
    let order = if roundoff || rows.len() < 2 {
        None
    } else {
        let h: Vec<f64> = rows.iter().map(|r| r.h).collect();
        let e: Vec<f64> = rows.iter().map(|r| r.errors.l2).collect();
        Some(log_log_slope(&h, &e))
    };
    Ok(ConvergenceTable {
        scheme,
        rows,
        order,
        at_machine_precision: roundoff,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.7)).collect();
        assert!((log_log_slope(&x, &y) - 1.7).abs() < 1e-12);
    }
}
