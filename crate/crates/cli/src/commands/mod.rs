mod convergence;
mod decompose;
mod gtw;
mod simulate;
mod verify;
mod waves;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use gtw_core::field::linspace;
use gtw_core::io::write_field;
use gtw_core::{GridField, HyperbolicSystem, SolutionField, State};
use gtw_fv::{advance, Boundary, GridSpec, ReferenceRun, Scheme};
use serde::Serialize;
use serde_json::Value;

pub use convergence::convergence;
pub use decompose::{decompose, decomposition_csv};
pub use gtw::gtw;
pub use simulate::simulate;
pub use verify::verify;
pub use waves::{case_i, case_ii, simple_wave};

use crate::error::{CliError, Result};
use crate::experiment::Experiment;

/// What a command produced: the files it wrote and a JSON summary that is
/// printed on stdout.
#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub command: String,
    pub files: Vec<PathBuf>,
    pub summary: Value,
    /// Names of failed checks; a non-empty list makes the run exit non-zero.
    pub failed: Vec<String>,
}

impl Outcome {
    fn new(command: &str) -> Self {
        Self {
            command: command.into(),
            files: Vec::new(),
            summary: Value::Null,
            failed: Vec::new(),
        }
    }

    fn write(&mut self, path: PathBuf, contents: &str) -> Result<()> {
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.files.push(path);
        Ok(())
    }

    fn check(&mut self, name: &str, value: f64, tol: f64) -> Value {
        let pass = value <= tol;
        if !pass {
            self.failed.push(format!("{name}: {value:e} > {tol:e}"));
        }
        serde_json::json!({ "value": value, "tol": tol, "pass": pass })
    }

    /// Turn failed checks into an error, after everything was written.
    pub fn into_result(self) -> Result<Self> {
        if self.failed.is_empty() {
            Ok(self)
        } else {
            Err(CliError::CheckFailed(self.failed.join("; ")))
        }
    }
}

fn write_grid(out: &mut Outcome, exp: &Experiment, name: &str, grid: &GridField) -> Result<PathBuf> {
    let path = exp.output_path(name)?;
    out.write(path.clone(), &write_field(grid)?)?;
    Ok(path)
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Finite-volume run from `exact` at `t = 0` on `[a, b]`; ghosts from
/// `exact` when `exact_ghosts`.
#[allow(clippy::too_many_arguments)]
fn reference_run(
    exp: &Experiment,
    exact: Arc<dyn SolutionField>,
    (a, b): (f64, f64),
    cells: usize,
    cfl: f64,
    t_end: f64,
    scheme: Scheme,
    exact_ghosts: bool,
) -> Result<ReferenceRun> {
    let mut spec = GridSpec::new(a, b, cells, t_end);
    spec.cfl = cfl;
    if exact_ghosts {
        spec = spec.with_boundary(Boundary::ExactDirichlet(exact.clone()));
    }
    let init = spec.sample(exact.as_ref(), 0.0)?;
    if exp.settings.fixed_step {
        spec.fixed_dt = Some(fixed_dt(exp.sys.as_ref(), &init, &spec));
    }
    Ok(advance(exp.sys.as_ref(), &init, &spec, scheme)?)
}

/// Fixed step from the CFL condition on the initial data, with room for
/// the speeds to grow.
fn fixed_dt(sys: &dyn HyperbolicSystem, init: &[State], spec: &GridSpec) -> f64 {
    let speed = init
        .iter()
        .map(|u| {
            sys.matrix(u)
                .complex_eigenvalues()
                .iter()
                .fold(0.0f64, |m, z| m.max(z.norm()))
        })
        .fold(0.0f64, f64::max);
    let h = spec.dx();
    let dt = if speed > 0.0 { spec.cfl * h / speed } else { h };
    // a whole number of steps
    spec.t_end / (spec.t_end / dt).ceil()
}

/// Interior sub-interval whose ghost cells stay inside `[a, b]`.
fn inner_interval(a: f64, b: f64, cells: usize) -> (f64, f64) {
    let d = (b - a) / cells.max(1) as f64;
    (a + d, b - d)
}

/// Evenly spaced interior points of `[a, b]`.
fn interior(a: f64, b: f64, n: usize) -> Vec<f64> {
    let pts = linspace(a, b, n + 2);
    pts[1..=n].to_vec()
}
