//! `U_x = π_j d^j` with `π_i = l^i·(B − F) / (λ^i − s)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::frame::TravellingFrame;
use crate::error::{Error, Result};
use crate::spectral::{decompose, SpectralDecomposition};
use crate::system::{HyperbolicSystem, State};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PiOptions {
    /// Sonic threshold on `|λ^i − s|`; `None` means `1e-8 (1 + |s|)`.
    pub sonic_tol: Option<f64>,
    /// Relative offset of the one-sided stencil used at removable points.
    pub limit_step: f64,
}

impl Default for PiOptions {
    fn default() -> Self {
        Self {
            sonic_tol: None,
            limit_step: 1e-4,
        }
    }
}

impl PiOptions {
    pub fn sonic_tol(&self, s: f64) -> f64 {
        self.sonic_tol.unwrap_or(1e-8 * (1.0 + s.abs()))
    }
}

#[derive(Debug, Clone)]
pub struct PiCoefficients {
    pub pi: Vec<f64>,
    /// `λ^i − s`.
    pub gaps: Vec<f64>,
    /// `l^i · (B − F)`.
    pub numerators: Vec<f64>,
    /// Families at a removable sonic point, whose `π` is a one-sided limit.
    pub removable: Vec<usize>,
    pub dec: SpectralDecomposition,
    /// `‖(A − s I) Σ π_j d^j − (B − F)‖_∞`.
    pub reconstruction_defect: f64,
}

impl PiCoefficients {
    pub fn ux(&self) -> State {
        self.dec.combine(&self.pi)
    }

    pub fn ut(&self, frame: &TravellingFrame, u: &State) -> State {
        frame.source(u) - self.ux() * frame.s
    }
}

/// `π` without any sonic handling: `None` for a family whose gap is below `tol`.
fn raw<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    frame: &TravellingFrame,
    u: &State,
    tol: f64,
) -> Result<(SpectralDecomposition, Vec<f64>, Vec<f64>, Vec<Option<f64>>)> {
    let dec = decompose(sys, u)?;
    let rhs = sys.source(u) - frame.source(u);
    let gaps: Vec<f64> = dec.lambdas.iter().map(|l| l - frame.s).collect();
    let nums: Vec<f64> = dec.left.iter().map(|l| l.dot(&rhs)).collect();
    let pi = gaps
        .iter()
        .zip(&nums)
        .map(|(g, n)| if g.abs() > tol { Some(n / g) } else { None })
        .collect();
    Ok((dec, gaps, nums, pi))
}

pub fn pi_coefficients<S: HyperbolicSystem + ?Sized>(sys: &S, frame: &TravellingFrame, u: &State) -> Result<PiCoefficients> {
    pi_coefficients_with(sys, frame, u, &PiOptions::default())
}

pub fn pi_coefficients_with<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    frame: &TravellingFrame,
    u: &State,
    opts: &PiOptions,
) -> Result<PiCoefficients> {
    let tol = opts.sonic_tol(frame.s);
    let (dec, gaps, numerators, raw_pi) = raw(sys, frame, u, tol)?;
    let mut pi = vec![0.0; gaps.len()];
    let mut removable = Vec::new();
    for i in 0..gaps.len() {
        match raw_pi[i] {
            Some(p) => pi[i] = p,
            None if numerators[i].abs() > tol => {
                return Err(Error::SubShock {
                    family: i,
                    state: u.iter().copied().collect(),
                    gap: gaps[i],
                    numerator: numerators[i],
                })
            }
            None => {
                removable.push(i);
                pi[i] = one_sided_limit(sys, frame, u, i, &dec, tol, opts.limit_step)?;
            }
        }
    }
    let ux = dec.combine(&pi);
    let target = sys.source(u) - frame.source(u);
    let defect = (sys.matrix(u) * &ux - &ux * frame.s - target).amax();
    Ok(PiCoefficients {
        pi,
        gaps,
        numerators,
        removable,
        dec,
        reconstruction_defect: defect,
    })
}

/// `π_i(U) ≈ 2 π_i(U + h e) − π_i(U + 2h e)` along the first direction
/// (`d^i`, then coordinate axes) that leaves the sonic set; zero if the
/// numerator vanishes along every probe.
fn one_sided_limit<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    frame: &TravellingFrame,
    u: &State,
    i: usize,
    dec: &SpectralDecomposition,
    tol: f64,
    rel: f64,
) -> Result<f64> {
    let n = u.len();
    let mut dirs = vec![dec.right[i].clone()];
    dirs.extend((0..n).map(|k| DVector::from_fn(n, |r, _| if r == k { 1.0 } else { 0.0 })));
    for e in dirs {
        let h = rel * u.amax().max(1.0) / e.amax();
        for sign in [1.0, -1.0] {
            let p1 = raw(sys, frame, &(u + &e * (sign * h)), tol);
            let p2 = raw(sys, frame, &(u + &e * (2.0 * sign * h)), tol);
            if let (Ok((_, g1, n1, v1)), Ok((_, g2, n2, v2))) = (p1, p2) {
                if n1[i] == 0.0 && n2[i] == 0.0 {
                    return Ok(0.0);
                }
                if let (Some(a), Some(b)) = (v1[i], v2[i]) {
                    if g1[i].abs() > 10.0 * tol && g2[i].abs() > 10.0 * tol {
                        return Ok(2.0 * a - b);
                    }
                }
            }
        }
    }
    Ok(0.0)
}
