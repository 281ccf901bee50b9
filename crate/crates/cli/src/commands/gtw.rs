use std::sync::Arc;

use gtw_core::gtw::integrate_gtw;
use gtw_core::residual::{field_difference, grid_pde_residual, pde_residual, DerivativeMode};
use gtw_core::{GridField, SolutionField};
use serde_json::{json, Value};

use super::{inner_interval, interior, reference_run, to_json, write_grid, Outcome};
use crate::error::Result;
use crate::experiment::Experiment;

/// Construct the generalized travelling wave of `[frame]` and check it
/// every way available: PDE residual, closed form, both integration
/// routes, the shift property when `F = 0`, and a finite-volume run.
pub fn gtw(exp: &Experiment) -> Result<Outcome> {
    let tol = exp.tolerances;
    let frame = exp.frame()?;
    let (x0, anchor) = exp.anchor()?;
    let window = exp.gtw_window()?;
    let opts = exp.gtw_options(frame.s);
    let cfg = exp.config.gtw.clone().unwrap_or_default();
    let names = exp.components();

    let sol = integrate_gtw(exp.sys.clone(), &frame, &anchor, x0, window, &opts)?;
    let (xs, ts) = (sol.xs.clone(), sol.ts.clone());
    let mut out = Outcome::new("gtw");
    let mut checks = serde_json::Map::new();

    let analytic = pde_residual(exp.sys.as_ref(), &sol, &xs, &ts, DerivativeMode::Analytic)?;
    checks.insert("pde_residual".into(), out.check("pde_residual", analytic.max, tol.residual));

    let mut grid = sol.grid()?;
    let (grid_residual, arrays) = grid_pde_residual(exp.sys.as_ref(), &grid)?;
    for (name, data) in names.iter().zip(arrays) {
        grid.push_auxiliary(format!("res_{name}"), data)?;
    }
    grid.metadata = exp.metadata("gtw");
    grid.metadata.insert("anchor".into(), json!(anchor.as_slice()));
    grid.metadata.insert("x0".into(), json!(x0));
    write_grid(&mut out, exp, "gtw.field", &grid)?;

    let closed = match exp.closed_form()? {
        Some(cf) => {
            let diff = field_difference(&sol, &cf, &xs, &ts, &names)?;
            checks.insert("closed_form".into(), out.check("closed_form", diff.max, tol.closed_form));
            let mut g = GridField::sample(&cf, &xs, &ts, names.clone())?;
            g.metadata = exp.metadata("gtw");
            g.metadata.insert("source".into(), json!("closed form"));
            write_grid(&mut out, exp, "closed_form.field", &g)?;
            to_json(&diff)
        }
        None => Value::Null,
    };

    let k = cfg.path_points.max(1);
    let mut path: f64 = 0.0;
    for &x in &interior(window.x_min, window.x_max, k) {
        for &t in &interior(0.0, window.t_max, k) {
            path = path.max(sol.path_independence(x, t)?);
        }
    }
    checks.insert("path_independence".into(), out.check("path_independence", path, tol.path));

    if frame.exact_tw {
        let shift = sol.shift_defect()?;
        checks.insert("shift".into(), out.check("shift", shift, tol.shift));
    }

    let fv = if cfg.fv_cells > 0 {
        let exact: Arc<dyn SolutionField> = Arc::new(sol.clone());
        let domain = inner_interval(window.x_min, window.x_max, cfg.fv_cells);
        let run = reference_run(
            exp,
            exact.clone(),
            domain,
            cfg.fv_cells,
            0.45,
            window.t_max,
            cfg.fv_scheme,
            true,
        )?;
        let errors = run.errors(exact.as_ref())?;
        checks.insert("fv_cross".into(), out.check("fv_cross", errors.linf, tol.fv_cross));
        json!({ "scheme": cfg.fv_scheme, "cells": cfg.fv_cells, "domain": domain, "steps": run.steps, "errors": errors })
    } else {
        Value::Null
    };

    let mut report = exp.metadata("gtw");
    report.insert("anchor".into(), json!(anchor.as_slice()));
    report.insert("x0".into(), json!(x0));
    report.insert("exact_tw".into(), json!(frame.exact_tw));
    report.insert("max_compat_residual".into(), json!(sol.max_compat_residual));
    report.insert("pde_residual_analytic".into(), to_json(&analytic));
    report.insert("pde_residual_grid".into(), to_json(&grid_residual));
    report.insert("closed_form_difference".into(), closed);
    report.insert("fv".into(), fv);
    report.insert("checks".into(), Value::Object(checks));
    let report = Value::Object(report);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    out.write(exp.output_path("report.json")?, &text)?;
    out.summary = report;
    out.into_result()
}
