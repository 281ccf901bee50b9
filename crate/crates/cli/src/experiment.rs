//! A validated configuration turned into model objects.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use gtw_core::constraints::{riemann_chart, InvariantChart};
use gtw_core::gtw::{GtwOptions, GtwWindow, PiOptions, TravellingFrame};
use gtw_core::moc::{MocOptions, MocWindow};
use gtw_core::models::{BarotropicModel, Beta, ForceSpec, GtwClosedForm, PressureLaw};
use gtw_core::ode::OdeOptions;
use gtw_core::{GenericSystem, HyperbolicSystem, State};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Map, Value};

use crate::config::{
    BetaConfig, ExperimentConfig, ForceConfig, FrameFamily, ModelConfig, PressureConfig, Tolerances, WindowConfig,
};
use crate::error::{CliError, Result};
use crate::expr::Expr;

/// Command-line settings that sit on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct RunSettings {
    pub out: Option<PathBuf>,
    pub tol_overrides: Vec<String>,
    pub fixed_step: bool,
    pub seed_count: Option<usize>,
}

pub struct Experiment {
    pub config: ExperimentConfig,
    pub tolerances: Tolerances,
    pub settings: RunSettings,
    pub sys: Arc<dyn HyperbolicSystem>,
    /// Set for barotropic models, which have closed-form charts.
    pub barotropic: Option<BarotropicModel>,
    model_label: String,
}

fn compile_all(texts: &[String], vars: &[&str]) -> Result<Vec<Expr>> {
    texts.iter().map(|t| Ok(Expr::parse(t, vars)?)).collect()
}

fn eval_vector(exprs: &[Expr], values: &[f64]) -> DVector<f64> {
    DVector::from_iterator(exprs.len(), exprs.iter().map(|e| e.eval_or_nan(values)))
}

fn beta(cfg: &BetaConfig) -> Result<Beta> {
    Ok(match cfg {
        BetaConfig::Constant(b) => Beta::Constant(*b),
        BetaConfig::Text(t) if t.replace(' ', "") == "rho/c" => Beta::RhoOverC,
        BetaConfig::Text(t) => {
            let e = Expr::parse(t, &["rho"])?;
            Beta::Custom(Arc::new(move |rho| e.eval_or_nan(&[rho])))
        }
    })
}

fn pressure(cfg: &PressureConfig) -> Result<PressureLaw> {
    let law = match cfg {
        PressureConfig::Polytropic { kappa, gamma } => PressureLaw::polytropic(*kappa, *gamma),
        PressureConfig::Isothermal { a } => PressureLaw::isothermal(*a),
        PressureConfig::Custom { p, dp } => {
            let (p, dp) = (Expr::parse(p, &["rho"])?, Expr::parse(dp, &["rho"])?);
            let label = format!("custom(p = {})", p.text());
            PressureLaw::custom(label, move |r| p.eval_or_nan(&[r]), move |r| dp.eval_or_nan(&[r]))
        }
    };
    law.validate().map_err(|e| CliError::config(e.to_string()))?;
    Ok(law)
}

impl Experiment {
    pub fn new(config: ExperimentConfig, settings: RunSettings) -> Result<Self> {
        config.validate()?;
        let mut tolerances = config.tolerances;
        for o in &settings.tol_overrides {
            tolerances.apply_override(o)?;
        }
        if settings.seed_count.is_some_and(|n| n < 3) {
            return Err(CliError::config("--seed-count must be at least 3"));
        }
        let (sys, barotropic, model_label): (Arc<dyn HyperbolicSystem>, _, _) = match &config.model {
            ModelConfig::Barotropic {
                pressure: p,
                force,
                rho_min,
            } => {
                let law = pressure(p)?;
                let force = match force {
                    ForceConfig::None => ForceSpec::None,
                    ForceConfig::GtwFamily => {
                        let frame = config
                            .frame
                            .as_ref()
                            .ok_or_else(|| CliError::config("force \"gtw-family\" needs a [frame] block"))?;
                        let k1 = frame
                            .k1
                            .ok_or_else(|| CliError::config("force \"gtw-family\" needs frame.k1"))?;
                        ForceSpec::GtwFamily {
                            k1,
                            s: frame.s,
                            beta: beta(&frame.beta)?,
                        }
                    }
                    ForceConfig::Expr { f } => {
                        let e = Expr::parse(f, &["rho", "u"])?;
                        let label = e.text().to_string();
                        ForceSpec::custom(label, move |rho, u| e.eval_or_nan(&[rho, u]))
                    }
                };
                let mut m = BarotropicModel::new(law, force);
                if let Some(r) = rho_min {
                    if !(*r > 0.0) {
                        return Err(CliError::config("rho_min must be positive"));
                    }
                    m.rho_min = *r;
                }
                let label = format!("barotropic: p = {}, f = {}", m.pressure.label(), m.force.label());
                (Arc::new(m.clone()), Some(m), label)
            }
            ModelConfig::User {
                components,
                matrix,
                source,
                positive,
            } => {
                let vars: Vec<&str> = components.iter().map(String::as_str).collect();
                let n = components.len();
                let entries = compile_all(&matrix.concat(), &vars)?;
                let src = compile_all(source, &vars)?;
                let pos = compile_all(positive, &vars)?;
                let sys = GenericSystem::new(
                    components.clone(),
                    move |u| DMatrix::from_iterator(n, n, entries.iter().map(|e| e.eval_or_nan(u.as_slice()))).transpose(),
                    move |u| eval_vector(&src, u.as_slice()),
                )
                .with_admissible(move |u| {
                    for e in &pos {
                        let v = e.eval_or_nan(u.as_slice());
                        if !(v > 0.0) {
                            return Err(format!("{} > 0 violated ({v})", e.text()));
                        }
                    }
                    Ok(())
                });
                let label = format!("user: A = {matrix:?}, B = {source:?}");
                (Arc::new(sys), None, label)
            }
        };
        Ok(Self {
            config,
            tolerances,
            settings,
            sys,
            barotropic,
            model_label,
        })
    }

    pub fn from_path(path: &Path, settings: RunSettings) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let config = ExperimentConfig::from_toml(&text).map_err(|e| match e {
            CliError::Config(message) => CliError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })?;
        Self::new(config, settings)
    }

    pub fn dim(&self) -> usize {
        self.sys.dim()
    }

    pub fn components(&self) -> Vec<String> {
        self.sys.component_names()
    }

    pub fn out_dir(&self) -> PathBuf {
        self.settings
            .out
            .clone()
            .or_else(|| self.config.output.dir.clone())
            .unwrap_or_else(|| PathBuf::from("."))
    }

    /// `dir/stem+name`, creating the directory.
    pub fn output_path(&self, name: &str) -> Result<PathBuf> {
        let dir = self.out_dir();
        std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(match &self.config.output.stem {
            Some(stem) => dir.join(format!("{stem}_{name}")),
            None => dir.join(name),
        })
    }

    pub fn ode(&self) -> OdeOptions {
        if self.settings.fixed_step {
            OdeOptions::fixed(self.tolerances.fixed_step)
        } else {
            OdeOptions::with_tolerances(self.tolerances.ode_rtol, self.tolerances.ode_atol)
        }
    }

    pub fn window(&self) -> Result<WindowConfig> {
        self.config
            .window
            .ok_or_else(|| CliError::config("this command needs a [window] block"))
    }

    pub fn gtw_window(&self) -> Result<GtwWindow> {
        let w = self.window()?;
        Ok(GtwWindow {
            x_min: w.x_min,
            x_max: w.x_max,
            t_max: w.t_max,
            nx: w.nx,
            nt: w.nt,
        })
    }

    pub fn moc_window(&self) -> Result<MocWindow> {
        let w = self.window()?;
        Ok(MocWindow {
            x_min: w.x_min,
            x_max: w.x_max,
            t_max: w.t_max,
            nx: w.nx,
            nt: w.nt,
        })
    }

    pub fn gtw_options(&self, s: f64) -> GtwOptions {
        GtwOptions {
            ode: self.ode(),
            compat_tol: self.tolerances.compat,
            pi: PiOptions {
                sonic_tol: Some(self.tolerances.sonic * (1.0 + s.abs())),
                ..PiOptions::default()
            },
            ..GtwOptions::default()
        }
    }

    pub fn moc_options(&self, seeds: usize, seed_range: Option<[f64; 2]>) -> MocOptions {
        MocOptions {
            ode: self.ode(),
            seed_count: self.settings.seed_count.unwrap_or(seeds),
            seed_range: seed_range.map(|[a, b]| (a, b)),
            check_tol: self.tolerances.check,
            ..MocOptions::default()
        }
    }

    pub fn frame(&self) -> Result<TravellingFrame> {
        let f = self
            .config
            .frame
            .as_ref()
            .ok_or_else(|| CliError::config("this command needs a [frame] block"))?;
        let n = self.dim();
        Ok(match f.family {
            FrameFamily::Zero => TravellingFrame::zero(f.s, n),
            FrameFamily::Barotropic => {
                if self.barotropic.is_none() {
                    return Err(CliError::config("frame family \"barotropic\" needs a barotropic model"));
                }
                TravellingFrame::barotropic_family(f.s, f.k1.unwrap_or_default())
            }
            FrameFamily::Custom => {
                let texts = f.source.clone().unwrap_or_default();
                if texts.len() != n {
                    return Err(CliError::config(format!("frame source needs {n} entries")));
                }
                let names = self.components();
                let vars: Vec<&str> = names.iter().map(String::as_str).collect();
                let exprs = compile_all(&texts, &vars)?;
                TravellingFrame::custom(f.s, format!("custom{texts:?}"), move |u| eval_vector(&exprs, u.as_slice()))
            }
        })
    }

    /// `U(x0, 0)`: given explicitly, or `(rho0, s + a0/rho0)`.
    pub fn anchor(&self) -> Result<(f64, State)> {
        let f = self
            .config
            .frame
            .as_ref()
            .ok_or_else(|| CliError::config("this command needs a [frame] block"))?;
        let u = match (&f.anchor, f.rho0, f.a0) {
            (Some(a), _, _) => {
                if a.len() != self.dim() {
                    return Err(CliError::config(format!("anchor needs {} components", self.dim())));
                }
                State::from_column_slice(a)
            }
            (None, Some(rho0), Some(a0)) if self.barotropic.is_some() => State::from_column_slice(&[rho0, f.s + a0 / rho0]),
            _ => {
                return Err(CliError::config(
                    "frame needs `anchor`, or `rho0` and `a0` for barotropic models",
                ))
            }
        };
        Ok((f.x0, u))
    }

    /// The closed-form solution, when model, frame and anchor fit the
    /// barotropic force family with `x0 = 0`.
    pub fn closed_form(&self) -> Result<Option<GtwClosedForm>> {
        let (Some(m), Some(f)) = (&self.barotropic, &self.config.frame) else {
            return Ok(None);
        };
        let ForceSpec::GtwFamily { k1, s, beta } = &m.force else {
            return Ok(None);
        };
        if f.family != FrameFamily::Barotropic || f.x0 != 0.0 {
            return Ok(None);
        }
        let (_, u) = self.anchor()?;
        let (rho0, a0) = (u[0], (u[1] - s) * u[0]);
        let w = self.window()?;
        // σ = x − s t over the window, with room for ghost cells
        let pad = 0.1 * (w.x_max - w.x_min) + 1.0;
        let sig = [w.x_min, w.x_max, w.x_min - s * w.t_max, w.x_max - s * w.t_max];
        let lo = sig.iter().cloned().fold(0.0f64, f64::min) - pad;
        let hi = sig.iter().cloned().fold(0.0f64, f64::max) + pad;
        Ok(Some(GtwClosedForm::new(
            *k1,
            *s,
            a0,
            rho0,
            beta.clone(),
            m.pressure.clone(),
            (lo, hi),
        )?))
    }

    /// Riemann-invariant chart of `family` retaining `u_retained`.
    pub fn chart(&self, family: usize, retained: usize, seed: Option<&[f64]>) -> Result<Arc<dyn InvariantChart>> {
        let n = self.dim();
        if family >= n || retained >= n {
            return Err(CliError::config(format!("family and retained must be below {n}")));
        }
        if let Some(m) = &self.barotropic {
            return Ok(Arc::new(m.chart(family, retained)?));
        }
        let seed = seed.ok_or_else(|| CliError::config("user models need `chart_seed` for their Riemann invariants"))?;
        if seed.len() != n {
            return Err(CliError::config(format!("chart_seed needs {n} components")));
        }
        let chart = riemann_chart(self.sys.clone(), family, &State::from_column_slice(seed))?;
        if chart.retained() != retained {
            return Err(CliError::config(format!(
                "the invariant chart of family {family} retains component {} here, not {retained}",
                chart.retained()
            )));
        }
        Ok(Arc::new(chart))
    }

    /// Names of the invariants in expressions: `r1 … r{N−1}`, plus `r` for `r1`.
    pub fn invariant_vars(&self) -> Vec<String> {
        let mut v: Vec<String> = (1..self.dim()).map(|a| format!("r{a}")).collect();
        v.push("r".into());
        v
    }

    /// Shared metadata block of every output.
    pub fn metadata(&self, command: &str) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("command".into(), json!(command));
        m.insert("code_version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("model".into(), json!(self.model_label));
        if let Ok(f) = self.frame() {
            m.insert("frame".into(), json!({ "s": f.s, "source": f.label, "exact_tw": f.exact_tw }));
        }
        m.insert("tolerances".into(), json!(self.tolerances));
        m.insert("tol_overrides".into(), json!(self.settings.tol_overrides));
        m.insert("fixed_step".into(), json!(self.settings.fixed_step));
        if let Some(n) = self.settings.seed_count {
            m.insert("seed_count".into(), json!(n));
        }
        m
    }
}
