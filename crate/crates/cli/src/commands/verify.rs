use std::path::{Path, PathBuf};

use gtw_core::io::read_field;
use gtw_core::residual::{grid_difference, grid_pde_residual};
use gtw_core::{GenericSystem, GridField};
use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use super::{read_text, to_json, Outcome};
use crate::error::{CliError, Result};
use crate::experiment::Experiment;

fn load(path: &Path) -> Result<GridField> {
    read_field(&read_text(path)?).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Residuals of stored fields against the configured model (when there is
/// one), and their difference when two fields are given.
pub fn verify(exp: Option<&Experiment>, files: &[PathBuf], out_dir: Option<&Path>) -> Result<Outcome> {
    if files.is_empty() || files.len() > 2 {
        return Err(CliError::config("verify takes one or two field files"));
    }
    if files.len() == 1 && exp.is_none() {
        return Err(CliError::config("verifying a single field needs --config for its model"));
    }
    let fields: Vec<GridField> = files.iter().map(|p| load(p)).collect::<Result<_>>()?;
    let tol = exp.map(|e| e.tolerances).unwrap_or_default();
    let mut out = Outcome::new("verify");
    let mut report = match exp {
        Some(e) => e.metadata("verify"),
        None => Map::new(),
    };
    report.insert("files".into(), json!(files));
    let mut checks = Map::new();

    if let Some(exp) = exp {
        let names = exp.components();
        let mut per_file = Vec::new();
        for (path, f) in files.iter().zip(&fields) {
            if f.components != names {
                return Err(CliError::Parse {
                    path: path.clone(),
                    message: format!("components {:?} do not match the model's {:?}", f.components, names),
                });
            }
            let (pde, _) = grid_pde_residual(exp.sys.as_ref(), f)?;
            let mut entry = json!({ "file": path, "pde_residual": to_json(&pde) });
            // the frame constraint U_t + s U_x = F(U) is itself a
            // hyperbolic system with A = s I and B = F
            if let Ok(frame) = exp.frame() {
                let n = names.len();
                let s = frame.s;
                let fr = frame.clone();
                let cons = GenericSystem::new(names.clone(), move |_| DMatrix::identity(n, n) * s, move |u| fr.source(u));
                let (c, _) = grid_pde_residual(&cons, f)?;
                entry["frame_residual"] = to_json(&c);
            }
            per_file.push(entry);
        }
        report.insert("residuals".into(), Value::Array(per_file));
    }

    if let [a, b] = &fields[..] {
        if a.components != b.components {
            return Err(CliError::config(format!(
                "fields have different components: {:?} vs {:?}",
                a.components, b.components
            )));
        }
        let diff = grid_difference(a, b).map_err(|e| CliError::config(e.to_string()))?;
        checks.insert("difference".into(), out.check("difference", diff.max, tol.compare));
        report.insert("difference".into(), to_json(&diff));
    }
    report.insert("checks".into(), Value::Object(checks));
    let report = Value::Object(report);
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join("verify.json");
        out.write(path, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
    }
    out.summary = report;
    out.into_result()
}
