use gtw_core::spectral::{decompose_numeric, DecomposeOptions};
use gtw_core::{HyperbolicSystem, State};
use serde_json::json;

use super::Outcome;
use crate::error::{CliError, Result};
use crate::experiment::Experiment;

/// CSV of the numeric eigenstructure at every state: the state, then per
/// family `lambda_i`, `l_i_*`, `d_i_*`, then the eigen-equation and
/// biorthonormality defects.
pub fn decomposition_csv(sys: &dyn HyperbolicSystem, states: &[Vec<f64>]) -> Result<String> {
    let names = sys.component_names();
    let n = names.len();
    let mut header: Vec<String> = names.clone();
    for i in 0..n {
        header.push(format!("lambda_{i}"));
        header.extend(names.iter().map(|c| format!("l_{i}_{c}")));
        header.extend(names.iter().map(|c| format!("d_{i}_{c}")));
    }
    header.push("eigen_residual".into());
    header.push("biorthonormality_defect".into());

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| CliError::config(e.to_string()))?;
    for s in states {
        if s.len() != n {
            return Err(CliError::config(format!("state {s:?} needs {n} components")));
        }
        let u = State::from_column_slice(s);
        sys.check_admissible(&u)?;
        let dec = decompose_numeric(sys, &u, &DecomposeOptions::default())?;
        let a = sys.matrix(&u);
        let mut row: Vec<String> = s.iter().map(f64::to_string).collect();
        for i in 0..n {
            row.push(dec.lambdas[i].to_string());
            row.extend(dec.left[i].iter().map(f64::to_string));
            row.extend(dec.right[i].iter().map(f64::to_string));
        }
        row.push(dec.right_residual(&a).max(dec.left_residual(&a)).to_string());
        row.push(dec.biorthonormality_defect().to_string());
        w.write_record(&row).map_err(|e| CliError::config(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::config(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn decompose(exp: &Experiment) -> Result<Outcome> {
    let cfg = exp
        .config
        .decompose
        .as_ref()
        .ok_or_else(|| CliError::config("decompose needs a [decompose] block with `states`"))?;
    let csv = decomposition_csv(exp.sys.as_ref(), &cfg.states)?;
    let mut out = Outcome::new("decompose");
    out.write(exp.output_path("decompose.csv")?, &csv)?;
    out.summary = json!({ "states": cfg.states.len(), "csv": csv });
    Ok(out)
}
