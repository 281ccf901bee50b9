use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ode::{integrate, OdeOptions};

type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Barotropic closure `p(ρ)`, with `c = √(p'(ρ))`.
#[derive(Clone)]
pub enum PressureLaw {
    /// `p = κ ρ^γ`
    Polytropic { kappa: f64, gamma: f64 },
    /// `p = a² ρ`
    Isothermal { a: f64 },
    /// User-supplied `p(ρ)` and `p'(ρ)`.
    Custom {
        label: String,
        p: Arc<ScalarFn>,
        dp: Arc<ScalarFn>,
    },
}

impl fmt::Debug for PressureLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PressureLaw::Polytropic { kappa, gamma } => f
                .debug_struct("Polytropic")
                .field("kappa", kappa)
                .field("gamma", gamma)
                .finish(),
            PressureLaw::Isothermal { a } => f.debug_struct("Isothermal").field("a", a).finish(),
            PressureLaw::Custom { label, .. } => f.debug_tuple("Custom").field(label).finish(),
        }
    }
}

impl PressureLaw {
    pub fn polytropic(kappa: f64, gamma: f64) -> Self {
        PressureLaw::Polytropic { kappa, gamma }
    }

    pub fn isothermal(a: f64) -> Self {
        PressureLaw::Isothermal { a }
    }

    pub fn custom(
        label: impl Into<String>,
        p: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dp: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PressureLaw::Custom {
            label: label.into(),
            p: Arc::new(p),
            dp: Arc::new(dp),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PressureLaw::Polytropic { kappa, gamma } if !(kappa > 0.0 && gamma > 1.0) => Err(Error::invalid(format!(
                "polytropic law needs kappa > 0 and gamma > 1, got {kappa}, {gamma}"
            ))),
            PressureLaw::Isothermal { a } if !(a > 0.0) => {
                Err(Error::invalid(format!("isothermal sound speed must be positive, got {a}")))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            PressureLaw::Polytropic { kappa, gamma } => format!("polytropic(kappa={kappa}, gamma={gamma})"),
            PressureLaw::Isothermal { a } => format!("isothermal(a={a})"),
            PressureLaw::Custom { label, .. } => label.clone(),
        }
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        match self {
            PressureLaw::Polytropic { kappa, gamma } => kappa * rho.powf(*gamma),
            PressureLaw::Isothermal { a } => a * a * rho,
            PressureLaw::Custom { p, .. } => p(rho),
        }
    }

    pub fn dpdrho(&self, rho: f64) -> f64 {
        match self {
            PressureLaw::Polytropic { kappa, gamma } => kappa * gamma * rho.powf(gamma - 1.0),
            PressureLaw::Isothermal { a } => a * a,
            PressureLaw::Custom { dp, .. } => dp(rho),
        }
    }

    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        let dp = self.dpdrho(rho);
        if dp > 0.0 && dp.is_finite() {
            Ok(dp.sqrt())
        } else {
            Err(Error::inadmissible(
                &[rho],
                format!("p'(rho) = {dp} is not positive, sound speed undefined"),
            ))
        }
    }

    /// `dc/dρ`.
    pub fn sound_speed_derivative(&self, rho: f64) -> Result<f64> {
        match self {
            PressureLaw::Polytropic { gamma, .. } => Ok(0.5 * (gamma - 1.0) * self.sound_speed(rho)? / rho),
            PressureLaw::Isothermal { .. } => Ok(0.0),
            PressureLaw::Custom { .. } => {
                let h = 1e-6 * rho.abs().max(1e-3);
                Ok((self.sound_speed(rho + h)? - self.sound_speed(rho - h)?) / (2.0 * h))
            }
        }
    }

    /// `Φ(ρ) = ∫_1^ρ c(r)/r dr`, the density part of the Riemann invariants `u ∓ Φ(ρ)`.
    pub fn riemann_integral(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::inadmissible(&[rho], "density must be positive"));
        }
        match *self {
            PressureLaw::Polytropic { gamma, .. } => Ok(2.0 * (self.sound_speed(rho)? - self.sound_speed(1.0)?) / (gamma - 1.0)),
            PressureLaw::Isothermal { a } => Ok(a * rho.ln()),
            PressureLaw::Custom { .. } => {
                // integrate in log-density so the integrand is c(e^s)
                let rhs = |s: f64, _y: &[f64], dy: &mut [f64]| {
                    dy[0] = self.sound_speed(s.exp())?;
                    Ok(())
                };
                let sol = integrate(rhs, 0.0, &[0.0], rho.ln(), &OdeOptions::with_tolerances(1e-12, 1e-14))
                    .map_err(|e| Error::QuadratureFailure(e.to_string()))?;
                Ok(sol.final_state()[0])
            }
        }
    }

    /// Inverse of [`riemann_integral`](Self::riemann_integral): the density with `Φ(ρ) = phi`.
    pub fn inverse_riemann_integral(&self, phi: f64) -> Result<f64> {
        match *self {
            PressureLaw::Polytropic { kappa, gamma } => {
                let c = 0.5 * (gamma - 1.0) * phi + self.sound_speed(1.0)?;
                if !(c > 0.0) {
                    return Err(Error::ChartEvaluation(format!(
                        "invariant value {phi} implies non-positive sound speed"
                    )));
                }
                Ok((c * c / (kappa * gamma)).powf(1.0 / (gamma - 1.0)))
            }
            PressureLaw::Isothermal { a } => Ok((phi / a).exp()),
            PressureLaw::Custom { .. } => {
                // Φ is strictly increasing; Newton in log-density from ρ = 1.
                let mut s: f64 = 0.0;
                for _ in 0..100 {
                    let rho = s.exp();
                    let g = self.riemann_integral(rho)? - phi;
                    let dg = self.sound_speed(rho)?;
                    let step = g / dg;
                    s -= step.clamp(-2.0, 2.0);
                    if step.abs() < 1e-14 * (1.0 + s.abs()) {
                        return Ok(s.exp());
                    }
                }
                Err(Error::ChartEvaluation(format!("no density with Phi = {phi}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_pressure_sound_speed() {
        let law = PressureLaw::polytropic(1.0, 2.0);
        assert!((law.sound_speed(1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!((law.sound_speed(4.0).unwrap() - 8f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn sound_speed_derivative_of_sqrt_two_rho() {
        let law = PressureLaw::polytropic(1.0, 2.0);
        let analytic = law.sound_speed_derivative(1.0).unwrap();
        assert!((analytic - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn custom_law_matches_builtin() {
        let builtin = PressureLaw::polytropic(1.0, 1.4);
        let custom = PressureLaw::custom("rho^1.4", |r| r.powf(1.4), |r| 1.4 * r.powf(0.4));
        for rho in [0.3, 1.0, 2.5] {
            let a = builtin.riemann_integral(rho).unwrap();
            let b = custom.riemann_integral(rho).unwrap();
            assert!((a - b).abs() < 1e-10, "{rho}: {a} vs {b}");
            let back = custom.inverse_riemann_integral(b).unwrap();
            assert!((back - rho).abs() < 1e-10);
            let dc = custom.sound_speed_derivative(rho).unwrap();
            assert!((dc - builtin.sound_speed_derivative(rho).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn riemann_integral_round_trip() {
        for law in [PressureLaw::polytropic(1.0, 2.0), PressureLaw::isothermal(0.7)] {
            for rho in [0.01, 0.5, 1.0, 7.0] {
                let phi = law.riemann_integral(rho).unwrap();
                assert!((law.inverse_riemann_integral(phi).unwrap() - rho).abs() < 1e-12 * rho.max(1.0));
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PressureLaw::polytropic(1.0, 1.0).validate().is_err());
        assert!(PressureLaw::isothermal(0.0).validate().is_err());
        assert!(PressureLaw::custom("neg", |r| -r, |_| -1.0).sound_speed(1.0).is_err());
    }
}
