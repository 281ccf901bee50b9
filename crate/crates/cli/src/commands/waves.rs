use gtw_core::moc::{case_i_solve, case_ii_solve, simple_wave as build_simple_wave, SimpleWave};
use serde_json::json;

use super::{write_grid, Outcome};
use crate::error::{CliError, Result};
use crate::experiment::Experiment;
use crate::expr::Expr;

fn invariant_exprs(exp: &Experiment, texts: &[String], what: &str) -> Result<Vec<Expr>> {
    let m = exp.dim() - 1;
    if texts.len() != m {
        return Err(CliError::config(format!("`{what}` needs {m} expressions")));
    }
    let vars = exp.invariant_vars();
    let vars: Vec<&str> = vars.iter().map(String::as_str).collect();
    texts.iter().map(|t| Ok(Expr::parse(t, &vars)?)).collect()
}

/// Bind `r1 … r{N−1}` and the alias `r`.
fn with_alias(r: &[f64]) -> Vec<f64> {
    let mut v = r.to_vec();
    v.push(r.first().copied().unwrap_or(f64::NAN));
    v
}

fn eval_all(exprs: &[Expr], values: &[f64]) -> gtw_core::Result<Vec<f64>> {
    exprs
        .iter()
        .map(|e| e.eval(values).map_err(|e| gtw_core::Error::invalid(e.to_string())))
        .collect()
}

/// Build the configured simple wave (shared with `convergence`).
pub(super) fn configured_simple_wave(exp: &Experiment) -> Result<SimpleWave> {
    let cfg = exp
        .config
        .simple_wave
        .clone()
        .ok_or_else(|| CliError::config("needs a [simple_wave] block"))?;
    if cfg.k.len() + 1 != exp.dim() {
        return Err(CliError::config(format!("`k` needs {} values", exp.dim() - 1)));
    }
    let chart = exp.chart(cfg.family, cfg.retained, cfg.chart_seed.as_deref())?;
    let v0 = Expr::parse(&cfg.v0, &["x"])?;
    let seeds = exp.settings.seed_count.unwrap_or(cfg.seeds);
    Ok(build_simple_wave(
        exp.sys.clone(),
        chart,
        cfg.k.clone(),
        move |x| v0.eval_or_nan(&[x]),
        (cfg.xi_min, cfg.xi_max),
        seeds,
    )?)
}

pub fn simple_wave(exp: &Experiment) -> Result<Outcome> {
    let wave = configured_simple_wave(exp)?;
    let w = exp.moc_window()?;
    let mut out = Outcome::new("simple-wave");
    let t_b = wave.breaking_time;
    let mut meta = exp.metadata("simple-wave");
    meta.insert("breaking_time".into(), json!(if t_b.is_finite() { Some(t_b) } else { None }));
    meta.insert("breaking_seed".into(), json!(wave.breaking_seed));
    meta.insert("k".into(), json!(wave.k));
    if w.t_max >= t_b {
        return Err(gtw_core::Error::PostBreakingQuery {
            t: w.t_max,
            breaking_time: t_b,
        }
        .into());
    }
    let mut grid = wave.grid(&w.xs(), &w.ts())?;
    grid.metadata = meta.clone();
    write_grid(&mut out, exp, "simple_wave.field", &grid)?;
    out.summary = serde_json::Value::Object(meta);
    Ok(out)
}

pub fn case_i(exp: &Experiment) -> Result<Outcome> {
    let cfg = exp
        .config
        .case_i
        .clone()
        .ok_or_else(|| CliError::config("case-i needs a [case_i] block"))?;
    if cfg.r0.len() + 1 != exp.dim() {
        return Err(CliError::config(format!("`r0` needs {} values", exp.dim() - 1)));
    }
    let chart = exp.chart(cfg.family, cfg.retained, cfg.chart_seed.as_deref())?;
    let f = invariant_exprs(exp, &cfg.f, "f")?;
    let v0 = Expr::parse(&cfg.v0, &["x"])?;
    let window = exp.moc_window()?;
    let opts = exp.moc_options(cfg.seeds.unwrap_or(2048), cfg.seed_range);
    let field = case_i_solve(
        exp.sys.clone(),
        chart,
        move |r| eval_all(&f, &with_alias(r)),
        cfg.r0.clone(),
        move |x| v0.eval_or_nan(&[x]),
        window,
        &opts,
    )?;
    let mut grid = field.grid()?;
    grid.metadata = exp.metadata("case-i");
    let mut out = Outcome::new("case-i");
    write_grid(&mut out, exp, "case_i.field", &grid)?;
    out.summary = json!({ "seeds": field.fan.seeds.len(), "window": [window.x_min, window.x_max, window.t_max] });
    Ok(out)
}

pub fn case_ii(exp: &Experiment) -> Result<Outcome> {
    let cfg = exp
        .config
        .case_ii
        .clone()
        .ok_or_else(|| CliError::config("case-ii needs a [case_ii] block"))?;
    let chart = exp.chart(cfg.family, cfg.retained, cfg.chart_seed.as_deref())?;
    let f = invariant_exprs(exp, &cfg.f, "f")?;
    let g = invariant_exprs(exp, &cfg.g, "g")?;
    if cfg.r0.len() + 1 != exp.dim() {
        return Err(CliError::config(format!("`r0` needs {} expressions", exp.dim() - 1)));
    }
    let r0: Vec<Expr> = cfg.r0.iter().map(|t| Ok(Expr::parse(t, &["x"])?)).collect::<Result<_>>()?;
    let v0 = Expr::parse(&cfg.v0, &["x"])?;
    let window = exp.moc_window()?;
    let opts = exp.moc_options(cfg.seeds.unwrap_or(2048), cfg.seed_range);
    let field = case_ii_solve(
        exp.sys.clone(),
        chart,
        move |r| eval_all(&f, &with_alias(r)),
        move |r| eval_all(&g, &with_alias(r)),
        move |x| eval_all(&r0, &[x]),
        move |x| v0.eval_or_nan(&[x]),
        window,
        &opts,
    )?;
    let mut grid = field.grid()?;
    grid.metadata = exp.metadata("case-ii");
    let mut out = Outcome::new("case-ii");
    write_grid(&mut out, exp, "case_ii.field", &grid)?;
    out.summary = json!({ "seeds": field.fan.seeds.len(), "window": [window.x_min, window.x_max, window.t_max] });
    Ok(out)
}
