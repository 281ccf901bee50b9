//! Eigenstructure of `A(U)`: speeds, right eigenvectors `d^i`, left eigenvectors `l^i`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::system::{HyperbolicSystem, State};

/// Components with magnitude at or below this are skipped when fixing signs.
const SIGN_THRESHOLD: f64 = 1e-12;

/// Speeds in ascending order with biorthonormal eigenvector pairs, `l^i · d^j = δ_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub lambdas: Vec<f64>,
    /// Right eigenvectors `d^i`.
    pub right: Vec<DVector<f64>>,
    /// Left eigenvectors `l^i`, stored as column vectors.
    pub left: Vec<DVector<f64>>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.lambdas.len()
    }

    /// Matrix whose columns are the `d^i`.
    pub fn right_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.right)
    }

    /// Matrix whose rows are the `l^i`.
    pub fn left_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.left).transpose()
    }

    /// Coefficients `l^i · v`.
    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.left.iter().map(|l| l.dot(v)))
    }

    /// `Σ_i c_i d^i`.
    pub fn combine(&self, coeffs: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.dim());
        for (c, d) in coeffs.iter().zip(&self.right) {
            out.axpy(*c, d, 1.0);
        }
        out
    }

    /// `max |l^i · d^j − δ_ij|`.
    pub fn biorthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.left[i].dot(&self.right[j]) - target).abs());
            }
        }
        worst
    }

    /// `max_i ‖A d^i − λ^i d^i‖ / ‖d^i‖`.
    pub fn right_residual(&self, a: &DMatrix<f64>) -> f64 {
        self.right
            .iter()
            .zip(&self.lambdas)
            .map(|(d, lam)| (a * d - d * *lam).norm() / d.norm())
            .fold(0.0, f64::max)
    }

    /// `max_i ‖l^i A − λ^i l^i‖ / ‖l^i‖`.
    pub fn left_residual(&self, a: &DMatrix<f64>) -> f64 {
        self.left
            .iter()
            .zip(&self.lambdas)
            .map(|(l, lam)| (a.transpose() * l - l * *lam).norm() / l.norm())
            .fold(0.0, f64::max)
    }

    /// Smallest gap between consecutive speeds and the offending pair.
    pub fn min_gap(&self) -> (f64, usize, usize) {
        let mut best = (f64::INFINITY, 0, 0);
        for i in 1..self.dim() {
            let gap = self.lambdas[i] - self.lambdas[i - 1];
            if gap < best.0 {
                best = (gap, i - 1, i);
            }
        }
        best
    }

    /// Same eigenbasis rescaled so each `d^i` has unit length and the sign
    /// convention holds; `l^i` is rescaled to keep `l^i · d^i = 1`.
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        for i in 0..self.dim() {
            let norm = out.right[i].norm();
            let sign = sign_of_first_significant(&out.right[i]);
            let scale = sign / norm;
            out.right[i] *= scale;
            out.left[i] /= scale;
        }
        out
    }

    /// Largest componentwise difference between two decompositions, each
    /// brought to the unit-norm convention first.
    pub fn distance(&self, other: &Self) -> f64 {
        let (a, b) = (self.normalized(), other.normalized());
        let mut worst: f64 = 0.0;
        for i in 0..a.dim() {
            worst = worst.max((a.lambdas[i] - b.lambdas[i]).abs());
            worst = worst.max((&a.right[i] - &b.right[i]).amax());
            worst = worst.max((&a.left[i] - &b.left[i]).amax());
        }
        worst
    }

    fn apply_sign_convention(&mut self) {
        for i in 0..self.dim() {
            if sign_of_first_significant(&self.right[i]) < 0.0 {
                self.right[i].neg_mut();
                self.left[i].neg_mut();
            }
        }
    }

    fn rescale_left(&mut self) {
        for i in 0..self.dim() {
            let dot = self.left[i].dot(&self.right[i]);
            self.left[i] /= dot;
        }
    }
}

fn sign_of_first_significant(v: &DVector<f64>) -> f64 {
    v.iter().find(|c| c.abs() > SIGN_THRESHOLD).map_or(1.0, |c| c.signum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecomposeOptions {
    /// Relative strict-hyperbolicity threshold; the absolute threshold is
    /// `hyperbolicity_tol · max(1, max |λ|)`.
    pub hyperbolicity_tol: f64,
    /// Largest imaginary part tolerated before declaring complex speeds.
    pub imag_tol: f64,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            hyperbolicity_tol: 1e-8,
            imag_tol: 1e-10,
        }
    }
}

/// Spectral decomposition at `u`, analytic when the model supplies one.
pub fn decompose<S: HyperbolicSystem + ?Sized>(sys: &S, u: &State) -> Result<SpectralDecomposition> {
    decompose_with(sys, u, &DecomposeOptions::default())
}

pub fn decompose_with<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u: &State,
    opts: &DecomposeOptions,
) -> Result<SpectralDecomposition> {
    sys.check_admissible(u)?;
    let mut dec = match sys.analytic_eigen(u) {
        Some(dec) => dec,
        None => return decompose_numeric(sys, u, opts),
    };
    sort_ascending(&mut dec);
    check_strict(&dec, u, opts)?;
    dec.apply_sign_convention();
    dec.rescale_left();
    Ok(dec)
}

/// Numeric decomposition, ignoring any analytic eigenstructure of the model.
///
/// Speeds come from a real Schur form; each `d^i` is the right singular
/// vector of `A − λ^i I` for its smallest singular value, and the `l^i` are
/// the rows of the inverse of `[d^1 … d^N]`.
pub fn decompose_numeric<S: HyperbolicSystem + ?Sized>(
    sys: &S,
    u: &State,
    opts: &DecomposeOptions,
) -> Result<SpectralDecomposition> {
    sys.check_admissible(u)?;
    let a = sys.matrix(u);
    let n = sys.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::invalid(format!(
            "matrix is {}x{}, expected {n}x{n}",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::inadmissible(u.as_slice(), "matrix has non-finite entries"));
    }

    let scale = a.amax().max(1.0);
    let complex = a.clone().complex_eigenvalues();
    let imag = complex.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag > opts.imag_tol * scale {
        return Err(Error::ComplexEigenvalues {
            state: u.as_slice().to_vec(),
            imag,
        });
    }
    let mut lambdas: Vec<f64> = complex.iter().map(|z| z.re).collect();
    lambdas.sort_by(f64::total_cmp);

    let probe = SpectralDecomposition {
        lambdas: lambdas.clone(),
        right: Vec::new(),
        left: Vec::new(),
    };
    check_strict(&probe, u, opts)?;

    let mut right = Vec::with_capacity(n);
    for &lam in &lambdas {
        let shifted = &a - DMatrix::identity(n, n) * lam;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.ok_or_else(|| Error::EigenvectorFailure {
            state: u.as_slice().to_vec(),
            reason: "SVD did not return right singular vectors".into(),
        })?;
        let (k, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty spectrum");
        let d: DVector<f64> = v_t.row(k).transpose();
        right.push(d);
    }

    let r = DMatrix::from_columns(&right);
    let inv = r.clone().try_inverse().ok_or_else(|| Error::EigenvectorFailure {
        state: u.as_slice().to_vec(),
        reason: "eigenvector matrix is singular".into(),
    })?;
    let left: Vec<DVector<f64>> = (0..n).map(|i| inv.row(i).transpose()).collect();

    // Rayleigh-type refinement of the speeds against the final basis.
    let lambdas = (0..n).map(|i| left[i].dot(&(&a * &right[i]))).collect();

    let mut dec = SpectralDecomposition { lambdas, right, left };
    dec.apply_sign_convention();
    dec.rescale_left();
    Ok(dec)
}

fn sort_ascending(dec: &mut SpectralDecomposition) {
    let mut order: Vec<usize> = (0..dec.dim()).collect();
    order.sort_by(|&i, &j| dec.lambdas[i].total_cmp(&dec.lambdas[j]));
    if order.iter().enumerate().all(|(k, &i)| k == i) {
        return;
    }
    dec.lambdas = order.iter().map(|&i| dec.lambdas[i]).collect();
    dec.right = order.iter().map(|&i| dec.right[i].clone()).collect();
    dec.left = order.iter().map(|&i| dec.left[i].clone()).collect();
}

fn check_strict(dec: &SpectralDecomposition, u: &State, opts: &DecomposeOptions) -> Result<()> {
    let lam_max = dec.lambdas.iter().map(|l| l.abs()).fold(1.0, f64::max);
    let (gap, i, j) = dec.min_gap();
    if dec.dim() > 1 && gap <= opts.hyperbolicity_tol * lam_max {
        return Err(Error::DegenerateSpeeds {
            i,
            j,
            gap,
            state: u.as_slice().to_vec(),
        });
    }
    Ok(())
}
