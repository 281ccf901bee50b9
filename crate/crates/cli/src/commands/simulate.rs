use std::sync::Arc;

use gtw_core::gtw::integrate_gtw;
use gtw_core::{GridField, SolutionField, State};
use serde_json::{json, Value};

use super::{inner_interval, reference_run, write_grid, Outcome};
use crate::config::{BoundaryKind, InitialSource};
use crate::error::{CliError, Result};
use crate::experiment::Experiment;
use crate::expr::Expr;

/// Initial data given as expressions in `x`; constant in time.
struct ExprData {
    exprs: Vec<Expr>,
}

impl SolutionField for ExprData {
    fn dim(&self) -> usize {
        self.exprs.len()
    }

    fn eval(&self, x: f64, _t: f64) -> gtw_core::Result<State> {
        let v: Vec<f64> = self
            .exprs
            .iter()
            .map(|e| e.eval(&[x]).map_err(|e| gtw_core::Error::invalid(e.to_string())))
            .collect::<gtw_core::Result<_>>()?;
        Ok(State::from_vec(v))
    }
}

/// The exact solution a command can start from: the constructed wave, the
/// closed form, or plain expressions (`exact = false`).
pub(super) fn initial_field(exp: &Experiment, from: InitialSource, t_end: f64) -> Result<(Arc<dyn SolutionField>, bool)> {
    Ok(match from {
        InitialSource::Gtw => {
            let frame = exp.frame()?;
            let (x0, anchor) = exp.anchor()?;
            let mut window = exp.gtw_window()?;
            window.t_max = t_end;
            let sol = integrate_gtw(exp.sys.clone(), &frame, &anchor, x0, window, &exp.gtw_options(frame.s))?;
            (Arc::new(sol), true)
        }
        InitialSource::ClosedForm => {
            let cf = exp.closed_form()?.ok_or_else(|| {
                CliError::config("no closed form: needs the barotropic force family, a barotropic frame and x0 = 0")
            })?;
            (Arc::new(cf), true)
        }
        InitialSource::Expr => {
            let texts = exp
                .config
                .simulate
                .as_ref()
                .and_then(|s| s.initial.clone())
                .ok_or_else(|| CliError::config("simulate from \"expr\" needs `initial`"))?;
            if texts.len() != exp.dim() {
                return Err(CliError::config(format!("`initial` needs {} expressions", exp.dim())));
            }
            let exprs = texts.iter().map(|t| Ok(Expr::parse(t, &["x"])?)).collect::<Result<_>>()?;
            (Arc::new(ExprData { exprs }), false)
        }
    })
}

pub fn simulate(exp: &Experiment) -> Result<Outcome> {
    let cfg = exp
        .config
        .simulate
        .clone()
        .ok_or_else(|| CliError::config("simulate needs a [simulate] block"))?;
    let w = exp.window()?;
    let (field, exact) = initial_field(exp, cfg.from, cfg.t_end)?;
    let domain = if cfg.from == InitialSource::Gtw {
        inner_interval(w.x_min, w.x_max, cfg.cells)
    } else {
        (w.x_min, w.x_max)
    };
    let ghosts = cfg.boundary == BoundaryKind::Exact;
    let run = reference_run(exp, field.clone(), domain, cfg.cells, cfg.cfl, cfg.t_end, cfg.scheme, ghosts)?;

    let initial = gtw_fv::GridSpec::new(domain.0, domain.1, cfg.cells, cfg.t_end).sample(field.as_ref(), 0.0)?;
    let n = exp.dim();
    let nx = run.centers.len();
    let mut state = vec![vec![0.0; 2 * nx]; n];
    for (row, values) in [&initial, &run.final_state].into_iter().enumerate() {
        for (ix, u) in values.iter().enumerate() {
            for c in 0..n {
                state[c][row * nx + ix] = u[c];
            }
        }
    }
    let mut grid = GridField::new(run.centers.clone(), vec![0.0, cfg.t_end], exp.components(), state)?;
    grid.metadata = exp.metadata("simulate");
    grid.metadata.insert("scheme".into(), json!(cfg.scheme));
    grid.metadata.insert("steps".into(), json!(run.steps));
    let errors = if exact { Some(run.errors(field.as_ref())?) } else { None };
    if let Some(e) = &errors {
        grid.metadata.insert("errors".into(), json!(e));
    }
    let mut out = Outcome::new("simulate");
    write_grid(&mut out, exp, "simulate.field", &grid)?;
    out.summary = json!({
        "scheme": cfg.scheme,
        "cells": cfg.cells,
        "steps": run.steps,
        "t_end": cfg.t_end,
        "max_speed": run.max_speeds.iter().cloned().fold(0.0f64, f64::max),
        "errors": errors.map_or(Value::Null, |e| json!(e)),
    });
    Ok(out)
}
