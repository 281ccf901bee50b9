use crate::error::{Error, Result};

/// Illinois regula falsi on a bracket `g(a) ≤ 0 ≤ g(b)`, carrying a payload
/// computed alongside each residual. Stops when `|g| ≤ tol` or the bracket
/// collapses; returns the last evaluated point.
pub(crate) fn illinois<T>(
    mut g: impl FnMut(f64) -> Result<(f64, T)>,
    (mut a, mut ga): (f64, f64),
    (mut b, mut gb): (f64, f64),
    tol: f64,
) -> Result<(f64, T)> {
    if ga.signum() == gb.signum() && ga != 0.0 && gb != 0.0 {
        return Err(Error::invalid("root is not bracketed"));
    }
    let mut side = 0;
    let mut last = None;
    for _ in 0..200 {
        let mut c = (a * gb - b * ga) / (gb - ga);
        if !c.is_finite() || c <= a.min(b) || c >= a.max(b) {
            c = 0.5 * (a + b);
        }
        let (gc, payload) = g(c)?;
        let collapsed = (b - a).abs() <= 4.0 * f64::EPSILON * (1.0 + c.abs());
        last = Some((c, payload));
        if gc.abs() <= tol || gc == 0.0 || collapsed {
            break;
        }
        if gc.signum() == gb.signum() {
            b = c;
            gb = gc;
            if side == -1 {
                ga *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            ga = gc;
            if side == 1 {
                gb *= 0.5;
            }
            side = 1;
        }
    }
    last.ok_or_else(|| Error::invalid("root search made no evaluation"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cubic_root() {
        let (x, v) = illinois(|x| Ok((x * x * x - 2.0, x * 2.0)), (0.0, -2.0), (2.0, 6.0), 1e-14).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-14);
        assert_eq!(v, 2.0 * x);
    }

    #[test]
    fn refuses_unbracketed() {
        assert!(illinois(|x| Ok((x * x + 1.0, ())), (0.0, 1.0), (1.0, 2.0), 1e-12).is_err());
    }
}
