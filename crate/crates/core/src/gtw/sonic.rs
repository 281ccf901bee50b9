//! Scan of a state-space box for the sonic sets `λ^i(U) = s`.

use serde::{Deserialize, Serialize};

use super::frame::TravellingFrame;
use crate::error::{Error, Result};
use crate::spectral::decompose;
use crate::system::{HyperbolicSystem, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SonicKind {
    /// `l^i·(B − F)` vanishes too: `π_i` has a finite limit.
    Removable,
    SubShock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SonicHit {
    pub family: usize,
    pub point: Vec<f64>,
    /// `l^i·(B − F)` at the point.
    pub numerator: f64,
    pub kind: SonicKind,
}

/// Locate sign changes of `λ^i − s` along the edges of a uniform grid of
/// `n` points per axis over the box `[lo, hi]`, refine each by bisection
/// and classify it by `|l^i·(B − F)|` against `threshold`
/// (`None`: `1e-8 (1 + |s|)`).
pub fn detect_sonic_locus<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    frame: &TravellingFrame,
    lo: &State,
    hi: &State,
    n: usize,
    threshold: Option<f64>,
) -> Result<Vec<SonicHit>> {
    let dim = sys.dim();
    if lo.len() != dim || hi.len() != dim || n < 2 {
        return Err(Error::invalid("sonic scan needs a box of the system dimension and n >= 2"));
    }
    let thr = threshold.unwrap_or(1e-8 * (1.0 + frame.s.abs()));
    let total = n.pow(dim as u32);
    let point = |idx: usize| -> State {
        let mut rem = idx;
        State::from_fn(dim, |k, _| {
            let i = rem % n;
            rem /= n;
            lo[k] + (hi[k] - lo[k]) * i as f64 / (n - 1) as f64
        })
    };
    let gap = |u: &State, family: usize| -> Result<f64> { Ok(decompose(sys, u)?.lambdas[family] - frame.s) };

    let mut hits = Vec::new();
    for idx in 0..total {
        let a = point(idx);
        let ga: Vec<f64> = decompose(sys, &a)?.lambdas.iter().map(|l| l - frame.s).collect();
        let mut stride = 1;
        for k in 0..dim {
            let coord = (idx / stride) % n;
            stride *= n;
            if coord + 1 == n {
                continue;
            }
            let b = point(idx + stride / n);
            let gb: Vec<f64> = decompose(sys, &b)?.lambdas.iter().map(|l| l - frame.s).collect();
            for family in 0..dim {
                if ga[family] == 0.0 || ga[family].signum() == gb[family].signum() {
                    continue;
                }
                // bisection on the edge; the edge direction is axis k
                let (mut p, mut q) = (a.clone(), b.clone());
                let mut gp = ga[family];
                for _ in 0..60 {
                    let mid = (&p + &q) * 0.5;
                    let gm = gap(&mid, family)?;
                    if gm.signum() == gp.signum() {
                        p = mid;
                        gp = gm;
                    } else {
                        q = mid;
                    }
                    if (q[k] - p[k]).abs() <= 1e-14 * (1.0 + p[k].abs()) {
                        break;
                    }
                }
                let root = (&p + &q) * 0.5;
                let dec = decompose(sys, &root)?;
                let numerator = dec.left[family].dot(&(sys.source(&root) - frame.source(&root)));
                hits.push(SonicHit {
                    family,
                    point: root.iter().copied().collect(),
                    numerator,
                    kind: if numerator.abs() <= thr {
                        SonicKind::Removable
                    } else {
                        SonicKind::SubShock
                    },
                });
            }
        }
    }
    Ok(hits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::BarotropicModel;
    use nalgebra::dvector;

    #[test]
    fn finds_both_families_for_unit_speed() {
        let m = BarotropicModel::flagship();
        let hits = detect_sonic_locus(
            &m,
            &TravellingFrame::zero(1.0, 2),
            &dvector![0.5, -2.0],
            &dvector![2.0, 4.0],
            9,
            None,
        )
        .unwrap();
        assert!(hits.iter().any(|h| h.family == 0));
        assert!(hits.iter().any(|h| h.family == 1));
        for h in &hits {
            let c = m.sound_speed(h.point[0]).unwrap();
            let lam = if h.family == 0 { h.point[1] - c } else { h.point[1] + c };
            assert!((lam - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn fast_frame_misses_everything() {
        let m = BarotropicModel::flagship();
        let hits = detect_sonic_locus(
            &m,
            &TravellingFrame::zero(50.0, 2),
            &dvector![0.5, -1.0],
            &dvector![2.0, 1.0],
            6,
            None,
        )
        .unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn frame_equal_to_source_is_removable_everywhere() {
        let m = BarotropicModel::flagship();
        let m2 = m.clone();
        let frame = TravellingFrame::custom(1.0, "B", move |u| m2.source(u));
        let hits = detect_sonic_locus(&m, &frame, &dvector![0.5, -2.0], &dvector![2.0, 4.0], 7, None).unwrap();
        assert!(!hits.is_empty());
        assert!(hits.iter().all(|h| h.kind == SonicKind::Removable));
    }
}
