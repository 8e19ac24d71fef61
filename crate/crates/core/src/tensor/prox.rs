//! Dense SVD and the two proximal maps used by the solvers.

use faer::MatRef;

use super::{Matrix, Tensor3};
use crate::error::{Error, Result};

/// Thin SVD `m = u · diag(sigma) · vt` with singular values in descending
/// order. Each left singular vector has its largest-magnitude entry made
/// nonnegative (ties go to the lowest index) and the matching right vector is
/// flipped with it.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub sigma: Vec<f64>,
    pub vt: Matrix,
}

pub fn svd(m: &Matrix) -> Result<Svd> {
    if !m.is_finite() {
        return Err(Error::Numeric("SVD input has non-finite entries".into()));
    }
    let (rows, cols) = (m.rows(), m.cols());
    let p = rows.min(cols);
    if p == 0 {
        return Ok(Svd {
            u: Matrix::zeros(rows, 0),
            sigma: Vec::new(),
            vt: Matrix::zeros(0, cols),
        });
    }
    let a = MatRef::from_column_major_slice(m.as_slice(), rows, cols);
    let dec = a
        .thin_svd()
        .map_err(|e| Error::Numeric(format!("SVD did not converge: {e:?}")))?;
    let (u, v, s) = (dec.U(), dec.V(), dec.S().column_vector());

    let mut uu = Matrix::zeros(rows, p);
    let mut vt = Matrix::zeros(p, cols);
    let mut sigma = Vec::with_capacity(p);
    for r in 0..p {
        sigma.push(s[r]);
        let mut pivot = 0;
        for i in 1..rows {
            if u[(i, r)].abs() > u[(pivot, r)].abs() {
                pivot = i;
            }
        }
        let sign = if u[(pivot, r)] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..rows {
            uu[(i, r)] = sign * u[(i, r)];
        }
        for j in 0..cols {
            vt[(r, j)] = sign * v[(j, r)];
        }
    }
    Ok(Svd { u: uu, sigma, vt })
}

impl Svd {
    /// `u · diag(values) · vt` using the first `values.len()` triplets.
    pub fn reconstruct_with(&self, values: &[f64]) -> Matrix {
        let (rows, cols) = (self.u.rows(), self.vt.cols());
        let mut out = Matrix::zeros(rows, cols);
        for (r, &s) in values.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            let ucol = self.u.column(r);
            for j in 0..cols {
                let c = s * self.vt[(r, j)];
                if c == 0.0 {
                    continue;
                }
                let dst = &mut out.as_mut_slice()[j * rows..(j + 1) * rows];
                for (d, &uv) in dst.iter_mut().zip(ucol) {
                    *d += c * uv;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(&self.sigma)
    }
}

pub fn nuclear_norm(m: &Matrix) -> Result<f64> {
    if m.as_slice().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    Ok(svd(m)?.sigma.iter().sum())
}

/// Singular value thresholding: the minimizer of `tau ‖Y‖_* + ½‖Y − m‖_F²`.
///
/// An all-zero input returns zero without factorizing.
pub fn svt(m: &Matrix, tau: f64) -> Result<Matrix> {
    if !(tau >= 0.0) {
        return Err(Error::Config(format!("threshold must be nonnegative, got {tau}")));
    }
    if !m.is_finite() {
        return Err(Error::Numeric("SVT input has non-finite entries".into()));
    }
    if m.as_slice().iter().all(|&v| v == 0.0) {
        return Ok(Matrix::zeros(m.rows(), m.cols()));
    }
    let dec = svd(m)?;
    let kept: Vec<f64> = dec
        .sigma
        .iter()
        .map(|&s| (s - tau).max(0.0))
        .take_while(|&s| s > 0.0)
        .collect();
    Ok(dec.reconstruct_with(&kept))
}

#[inline]
pub fn soft_threshold_scalar(v: f64, tau: f64) -> f64 {
    v.signum() * (v.abs() - tau).max(0.0)
}

/// Elementwise `sign(x) · max(|x| − tau, 0)`.
pub fn soft_threshold(x: &Tensor3, tau: f64) -> Result<Tensor3> {
    if !(tau >= 0.0) {
        return Err(Error::Config(format!("threshold must be nonnegative, got {tau}")));
    }
    if !x.is_finite() {
        return Err(Error::Numeric("soft-threshold input has non-finite entries".into()));
    }
    Ok(x.map(|v| soft_threshold_scalar(v, tau)))
}
