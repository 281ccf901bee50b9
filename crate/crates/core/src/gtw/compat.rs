//! Compatibility of `U_x = P(U)`, `U_t = F − s P` with `P = π_j d^j`:
//! the fields `P` and `F` must commute, `[F, P] = ∇P F − ∇F P = 0`.
//! Projected on `l^m` this reads
//!
//! ```text
//! F_i ∂π_m/∂u_i − l^m_k (∂F_k/∂u_i d^j_i − ∂d^j_k/∂u_i F_i) π_j = 0.
//! ```

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::frame::TravellingFrame;
use super::pi::{pi_coefficients_with, PiOptions};
use crate::constraints::{EigenDerivative, ResidualProbe};
use crate::error::Result;
use crate::system::{HyperbolicSystem, State};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtwCompatResidual {
    /// One entry per family `m`.
    pub residual: Vec<f64>,
    /// `terms[m][j]`: contribution of `π_j` (and of `∇π_m·F` on the diagonal).
    pub terms: Vec<Vec<f64>>,
    /// `∇P F − ∇F P` in state components.
    pub bracket: Vec<f64>,
}

impl GtwCompatResidual {
    pub fn max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn gtw_compat_residual<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    frame: &TravellingFrame,
    u: &State,
    probe: &ResidualProbe,
) -> Result<GtwCompatResidual> {
    gtw_compat_residual_with(sys, frame, u, probe, &PiOptions::default())
}

pub fn gtw_compat_residual_with<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    frame: &TravellingFrame,
    u: &State,
    probe: &ResidualProbe,
    pi_opts: &PiOptions,
) -> Result<GtwCompatResidual> {
    let n = sys.dim();
    let base = pi_coefficients_with(sys, frame, u, pi_opts)?;
    let f = frame.source(u);
    let (l, d, pi) = (&base.dec.left, &base.dec.right, &base.pi);

    let dpi = probe.along(
        |s| pi_coefficients_with(sys, frame, s, pi_opts).map(|p| DVector::from_vec(p.pi)),
        u,
        &f,
    )?;
    let dd = EigenDerivative::along(sys, probe, u, &f)?;
    let jf_d: Vec<State> = match frame.source_jacobian(u) {
        Some(j) => d.iter().map(|dj| &j * dj).collect(),
        None => d
            .iter()
            .map(|dj| probe.along(|s| Ok(frame.source(s)), u, dj))
            .collect::<Result<_>>()?,
    };

    let mut terms = vec![vec![0.0; n]; n];
    let mut residual = vec![0.0; n];
    for m in 0..n {
        for j in 0..n {
            let mut t = pi[j] * l[m].dot(&(&dd.dright[j] - &jf_d[j]));
            if j == m {
                t += dpi[m];
            }
            terms[m][j] = t;
            residual[m] += t;
        }
    }
    let mut bracket = State::zeros(n);
    for j in 0..n {
        bracket += &d[j] * dpi[j] + (&dd.dright[j] - &jf_d[j]) * pi[j];
    }
    Ok(GtwCompatResidual {
        residual,
        terms,
        bracket: bracket.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{BarotropicModel, Beta, ForceSpec, PressureLaw};
    use nalgebra::dvector;

    #[test]
    fn zero_frame_is_identically_compatible() {
        let m = BarotropicModel::new(PressureLaw::polytropic(1.0, 1.4), ForceSpec::custom("g", |r, u| r * u - 0.3));
        let r = gtw_compat_residual(
            &m,
            &TravellingFrame::zero(0.2, 2),
            &dvector![1.4, 2.5],
            &ResidualProbe::default(),
        )
        .unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn force_family_is_compatible_for_several_laws() {
        for law in [
            PressureLaw::polytropic(1.0, 2.0),
            PressureLaw::polytropic(0.5, 3.0),
            PressureLaw::isothermal(0.9),
        ] {
            for beta in [Beta::RhoOverC, Beta::Constant(0.7)] {
                let m = BarotropicModel::new(law.clone(), ForceSpec::GtwFamily { k1: 0.5, s: 1.0, beta });
                let r = gtw_compat_residual(
                    &m,
                    &TravellingFrame::barotropic_family(1.0, 0.5),
                    &dvector![1.3, 3.7],
                    &ResidualProbe::default(),
                )
                .unwrap();
                assert!(r.max_abs() < 1e-7, "{law:?}: {r:?}");
            }
        }
    }

    #[test]
    fn residual_is_projection_of_bracket() {
        let m = BarotropicModel::flagship();
        let frame = TravellingFrame::custom(1.0, "u^2", |u| dvector![0.0, u[1] * u[1]]);
        let u = dvector![0.8, 0.3];
        let r = gtw_compat_residual(&m, &frame, &u, &ResidualProbe::default()).unwrap();
        assert!(r.max_abs() > 1e-3);
        let dec = crate::spectral::decompose(&m, &u).unwrap();
        let b = DVector::from_vec(r.bracket.clone());
        for k in 0..2 {
            assert!((dec.left[k].dot(&b) - r.residual[k]).abs() < 1e-12);
        }
    }
}
