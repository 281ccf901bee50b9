use std::sync::Arc;

use gtw_core::SolutionField;
use gtw_fv::{convergence_study, Boundary, GridSpec};
use serde_json::json;

use super::simulate::initial_field;
use super::waves::configured_simple_wave;
use super::{inner_interval, Outcome};
use crate::config::{ExactSource, InitialSource};
use crate::error::{CliError, Result};
use crate::experiment::Experiment;

/// Refinement study of a finite-volume scheme against an exact solution,
/// written as a CSV table with the fitted order.
///
/// Steps always follow the CFL condition here: one fixed step across the
/// ladder would not refine in time.
pub fn convergence(exp: &Experiment) -> Result<Outcome> {
    let cfg = exp
        .config
        .convergence
        .clone()
        .ok_or_else(|| CliError::config("convergence needs a [convergence] block"))?;
    let w = exp.window()?;
    let finest = *cfg.ladder.last().expect("validated ladder");
    let (exact, domain): (Arc<dyn SolutionField>, (f64, f64)) = match cfg.exact {
        ExactSource::ClosedForm => (
            initial_field(exp, InitialSource::ClosedForm, cfg.t_end)?.0,
            (w.x_min, w.x_max),
        ),
        // ghosts of the coarsest grid must stay inside the construction
        ExactSource::Gtw => (
            initial_field(exp, InitialSource::Gtw, cfg.t_end)?.0,
            inner_interval(w.x_min, w.x_max, cfg.ladder[0]),
        ),
        ExactSource::SimpleWave => {
            let wave = configured_simple_wave(exp)?;
            if cfg.t_end >= wave.breaking_time {
                return Err(gtw_core::Error::PostBreakingQuery {
                    t: cfg.t_end,
                    breaking_time: wave.breaking_time,
                }
                .into());
            }
            (Arc::new(wave), (w.x_min, w.x_max))
        }
    };
    let mut base = GridSpec::new(domain.0, domain.1, finest, cfg.t_end).with_boundary(Boundary::ExactDirichlet(exact.clone()));
    base.cfl = cfg.cfl;
    let table = convergence_study(exp.sys.as_ref(), exact.as_ref(), &base, &cfg.ladder, cfg.scheme)?;
    let mut out = Outcome::new("convergence");
    out.write(exp.output_path("convergence.csv")?, &table.to_csv())?;
    let mut meta = exp.metadata("convergence");
    meta.insert("exact".into(), json!(cfg.exact));
    meta.insert("table".into(), json!(table));
    out.summary = serde_json::Value::Object(meta);
    Ok(out)
}
