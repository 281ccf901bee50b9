//! Experiment configuration, read from TOML. Unknown keys are errors.
//!
//! ```toml
//! [model]
//! kind = "barotropic"
//! pressure = { law = "polytropic", kappa = 1.0, gamma = 2.0 }
//! force = { kind = "gtw-family" }
//!
//! [frame]
//! s = 1.0
//! family = "barotropic"
//! k1 = 0.5
//! a0 = 0.1
//! rho0 = 1.0
//!
//! [window]
//! x_min = -2.0
//! x_max = 2.0
//! t_max = 1.0
//! nx = 201
//! nt = 101
//! ```

use std::path::PathBuf;

use gtw_fv::Scheme;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub frame: Option<FrameConfig>,
    pub window: Option<WindowConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    pub decompose: Option<DecomposeConfig>,
    pub gtw: Option<GtwConfig>,
    pub simulate: Option<SimulateConfig>,
    pub simple_wave: Option<SimpleWaveConfig>,
    pub case_i: Option<CaseIConfig>,
    pub case_ii: Option<CaseIIConfig>,
    pub convergence: Option<ConvergenceConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    /// `ρ_t + (ρu)_x = 0`, `u_t + u u_x + p'(ρ)/ρ ρ_x = f(ρ, u)`.
    Barotropic {
        pressure: PressureConfig,
        #[serde(default)]
        force: ForceConfig,
        rho_min: Option<f64>,
    },
    /// `U_t + A(U) U_x = B(U)` with expression entries in the component names.
    User {
        components: Vec<String>,
        matrix: Vec<Vec<String>>,
        source: Vec<String>,
        /// Expressions that must stay positive on admissible states.
        #[serde(default)]
        positive: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PressureConfig {
    Polytropic {
        kappa: f64,
        gamma: f64,
    },
    Isothermal {
        a: f64,
    },
    /// `p(rho)` and `dp(rho)` as expressions in `rho`.
    Custom {
        p: String,
        dp: String,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ForceConfig {
    #[default]
    None,
    /// The force family compatible with the barotropic frame; `k1`, `s`
    /// and `beta` are taken from `[frame]`.
    GtwFamily,
    /// `f(rho, u)`.
    Expr { f: String },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrameFamily {
    /// `F = 0`: classical travelling waves.
    Zero,
    /// `F = (0, k1 (u − s))`.
    #[default]
    Barotropic,
    /// `F` given by `source` expressions.
    Custom,
}

/// `β(ρ)`: the string `"rho/c"`, a number, or an expression in `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaConfig {
    Constant(f64),
    Text(String),
}

impl Default for BetaConfig {
    fn default() -> Self {
        BetaConfig::Text("rho/c".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    pub s: f64,
    #[serde(default)]
    pub family: FrameFamily,
    pub k1: Option<f64>,
    #[serde(default)]
    pub beta: BetaConfig,
    pub a0: Option<f64>,
    pub rho0: Option<f64>,
    pub source: Option<Vec<String>>,
    /// `U(x0, 0)`; defaults to `(rho0, s + a0/rho0)` for barotropic models.
    pub anchor: Option<Vec<f64>>,
    #[serde(default)]
    pub x0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub t_max: f64,
    pub nx: usize,
    pub nt: usize,
}

/// Every tolerance a command uses; all can be overridden from the command
/// line with `--tol-override key=value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub ode_rtol: f64,
    pub ode_atol: f64,
    /// Step of the fixed-step integrator in `--fixed-step` mode.
    pub fixed_step: f64,
    /// Largest accepted compatibility residual along a construction.
    pub compat: f64,
    /// Relative sonic threshold, `|λ − s| ≤ sonic (1 + |s|)`.
    pub sonic: f64,
    /// Initial-data and structural pre-checks of the characteristic solvers.
    pub check: f64,
    /// Largest accepted PDE residual of a constructed solution.
    pub residual: f64,
    /// Largest accepted difference between construction and closed form.
    pub closed_form: f64,
    /// Largest accepted max-norm gap between the finite-volume reference
    /// and the construction.
    pub fv_cross: f64,
    /// Largest accepted `|U(x,t) − U(x − st, 0)|` when `F = 0`.
    pub shift: f64,
    /// Largest accepted gap between the two integration routes.
    pub path: f64,
    /// Largest accepted difference in `verify` comparisons.
    pub compare: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_rtol: 1e-10,
            ode_atol: 1e-12,
            fixed_step: 1e-3,
            compat: 1e-5,
            sonic: 1e-8,
            check: 1e-6,
            residual: 1e-7,
            closed_form: 1e-7,
            fv_cross: 1e-2,
            shift: 1e-9,
            path: 1e-6,
            compare: 1e-7,
        }
    }
}

impl Tolerances {
    /// Apply `key=value`; unknown keys and non-positive values are errors.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("tolerance override {spec:?} is not KEY=VALUE")))?;
        let (key, value) = (key.trim(), value.trim());
        let v: f64 = value
            .parse()
            .map_err(|_| CliError::config(format!("tolerance {key}: {value:?} is not a number")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::config(format!(
                "tolerance {key} must be positive and finite, got {v}"
            )));
        }
        let mut map = match serde_json::to_value(*self) {
            Ok(serde_json::Value::Object(m)) => m,
            _ => unreachable!("tolerances serialize to an object"),
        };
        if !map.contains_key(key) {
            let known: Vec<&str> = map.keys().map(String::as_str).collect();
            return Err(CliError::config(format!(
                "unknown tolerance {key:?} (known: {})",
                known.join(", ")
            )));
        }
        map.insert(key.to_string(), serde_json::json!(v));
        *self = serde_json::from_value(serde_json::Value::Object(map)).map_err(|e| CliError::config(e.to_string()))?;
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        let map = serde_json::to_value(self).map_err(|e| CliError::config(e.to_string()))?;
        for (k, v) in map.as_object().into_iter().flatten() {
            let v = v.as_f64().unwrap_or(f64::NAN);
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::config(format!("tolerance {k} must be positive and finite")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; `--out` takes precedence.
    pub dir: Option<PathBuf>,
    /// Prefix of every file written.
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeConfig {
    pub states: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GtwConfig {
    /// Cells of the finite-volume cross-check; 0 skips it.
    pub fv_cells: usize,
    pub fv_scheme: Scheme,
    /// Points per axis at which the two integration routes are compared.
    pub path_points: usize,
}

impl Default for GtwConfig {
    fn default() -> Self {
        Self {
            fv_cells: 256,
            fv_scheme: Scheme::MacCormack,
            path_points: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialSource {
    /// The generalized travelling wave of `[frame]` at `t = 0`.
    #[default]
    Gtw,
    /// The closed form of the barotropic force family.
    ClosedForm,
    /// `initial` expressions in `x`.
    Expr,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryKind {
    #[default]
    Extrapolate,
    /// Ghost values from the exact solution (not for `from = "expr"`).
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub cells: usize,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub t_end: f64,
    #[serde(default)]
    pub from: InitialSource,
    pub initial: Option<Vec<String>>,
    #[serde(default)]
    pub boundary: BoundaryKind,
}

fn default_scheme() -> Scheme {
    Scheme::MacCormack
}

fn default_cfl() -> f64 {
    0.45
}

fn default_seeds() -> usize {
    2048
}

fn default_retained() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimpleWaveConfig {
    pub family: usize,
    #[serde(default = "default_retained")]
    pub retained: usize,
    /// Values of the invariants that stay fixed.
    pub k: Vec<f64>,
    /// Retained variable on `t = 0`, an expression in `x`.
    pub v0: String,
    pub xi_min: f64,
    pub xi_max: f64,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
    /// Reference state of the quadrature chart (user models only).
    pub chart_seed: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseIConfig {
    pub family: usize,
    #[serde(default = "default_retained")]
    pub retained: usize,
    /// `F(R)`, expressions in `r1 … r{N−1}` (`r` for `r1`).
    pub f: Vec<String>,
    pub r0: Vec<f64>,
    /// Retained variable on `t = 0`, an expression in `x`.
    pub v0: String,
    pub chart_seed: Option<Vec<f64>>,
    pub seed_range: Option<[f64; 2]>,
    /// Characteristic seeds; defaults to 2048.
    pub seeds: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseIIConfig {
    pub family: usize,
    #[serde(default = "default_retained")]
    pub retained: usize,
    pub f: Vec<String>,
    pub g: Vec<String>,
    /// Invariants on `t = 0`, expressions in `x`.
    pub r0: Vec<String>,
    pub v0: String,
    pub chart_seed: Option<Vec<f64>>,
    pub seed_range: Option<[f64; 2]>,
    /// Characteristic seeds; defaults to 2048.
    pub seeds: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExactSource {
    #[default]
    ClosedForm,
    Gtw,
    SimpleWave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub ladder: Vec<usize>,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default)]
    pub exact: ExactSource,
}

impl ExperimentConfig {
    /// Parse and check the structure. Expressions are compiled later, when
    /// the experiment is assembled.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::config(e.to_string().trim_end().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if let ModelConfig::User {
            components,
            matrix,
            source,
            ..
        } = &self.model
        {
            let n = components.len();
            if n == 0 {
                return Err(CliError::config("user model needs at least one component"));
            }
            if matrix.len() != n || matrix.iter().any(|r| r.len() != n) {
                return Err(CliError::config(format!("user model matrix must be {n}×{n}")));
            }
            if source.len() != n {
                return Err(CliError::config(format!("user model source needs {n} entries")));
            }
            let mut names = components.clone();
            names.sort();
            names.dedup();
            if names.len() != n {
                return Err(CliError::config("component names must be distinct"));
            }
            for c in components {
                let ok = c.chars().next().is_some_and(|h| h.is_ascii_alphabetic() || h == '_')
                    && c.chars().all(|h| h.is_ascii_alphanumeric() || h == '_');
                if !ok || matches!(c.as_str(), "x" | "t" | "pi" | "e") {
                    return Err(CliError::config(format!("invalid component name {c:?}")));
                }
            }
        }
        if let Some(w) = &self.window {
            let finite = [w.x_min, w.x_max, w.t_max].iter().all(|v| v.is_finite());
            if !finite || !(w.x_min < w.x_max) || !(w.t_max > 0.0) || w.nx < 2 || w.nt < 2 {
                return Err(CliError::config(
                    "window needs finite x_min < x_max, t_max > 0, nx ≥ 2 and nt ≥ 2",
                ));
            }
            if w.nx.saturating_mul(w.nt) > 50_000_000 {
                return Err(CliError::config("window grid is too large"));
            }
        }
        if let Some(f) = &self.frame {
            if !f.s.is_finite() || !f.x0.is_finite() {
                return Err(CliError::config("frame speed and x0 must be finite"));
            }
            if f.family == FrameFamily::Custom && f.source.is_none() {
                return Err(CliError::config("frame family \"custom\" needs `source`"));
            }
            if f.family == FrameFamily::Barotropic && f.k1.is_none() {
                return Err(CliError::config("frame family \"barotropic\" needs `k1`"));
            }
        }
        if let Some(s) = &self.simulate {
            if s.from == InitialSource::Expr && s.initial.is_none() {
                return Err(CliError::config("simulate from \"expr\" needs `initial`"));
            }
            if s.from == InitialSource::Expr && s.boundary == BoundaryKind::Exact {
                return Err(CliError::config(
                    "exact boundaries need an exact solution, not `from = \"expr\"`",
                ));
            }
            if !(s.t_end > 0.0 && s.t_end.is_finite()) {
                return Err(CliError::config("simulate t_end must be positive"));
            }
        }
        if let Some(c) = &self.convergence {
            if c.ladder.len() < 2 || c.ladder.windows(2).any(|w| w[1] <= w[0]) {
                return Err(CliError::config(
                    "convergence ladder needs at least two increasing cell counts",
                ));
            }
            if !(c.t_end > 0.0 && c.t_end.is_finite()) {
                return Err(CliError::config("convergence t_end must be positive"));
            }
        }
        let case_seeds = [
            self.case_i.as_ref().and_then(|c| c.seeds),
            self.case_ii.as_ref().and_then(|c| c.seeds),
        ];
        if case_seeds.into_iter().flatten().any(|n| n < 3) {
            return Err(CliError::config("characteristic cases need at least 3 seeds"));
        }
        if let Some(s) = &self.simple_wave {
            if !(s.xi_min < s.xi_max) || s.seeds < 3 {
                return Err(CliError::config("simple wave needs xi_min < xi_max and at least 3 seeds"));
            }
        }
        Ok(())
    }
}
