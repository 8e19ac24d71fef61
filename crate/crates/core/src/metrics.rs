//! Per-frontal-slice PSNR and SSIM, averaged over slices.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tensor::{Matrix, Tensor3};

/// Reported PSNR for identical slices.
pub const PSNR_CAP_DB: f64 = 99.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
const SSIM_RANGE: f64 = 1.0;

fn check_shapes(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::Shape(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

pub fn mse(reference: &Matrix, test: &Matrix) -> Result<f64> {
    check_shapes(reference, test)?;
    let n = reference.as_slice().len() as f64;
    Ok(reference
        .as_slice()
        .iter()
        .zip(test.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n)
}

/// `10 log10(peak² / MSE)`, or [`PSNR_CAP_DB`] when the slices are identical.
pub fn psnr(reference: &Matrix, test: &Matrix, peak: f64) -> Result<f64> {
    if !(peak > 0.0) {
        return Err(Error::Config(format!("PSNR peak must be positive, got {peak}")));
    }
    let e = mse(reference, test)?;
    if e == 0.0 {
        return Ok(PSNR_CAP_DB);
    }
    Ok(10.0 * (peak * peak / e).log10())
}

fn gaussian_kernel() -> [f64; SSIM_WINDOW] {
    let mut k = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in k.iter_mut().enumerate() {
        let d = i as f64 - c;
        *v = (-(d * d) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = k.iter().sum();
    k.map(|v| v / s)
}

/// Half-sample symmetric index reflection: `... c b a | a b c ...`.
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = i.rem_euclid(period);
    if m >= n {
        m = period - 1 - m;
    }
    m as usize
}

/// Separable Gaussian blur with symmetric boundary.
fn blur(src: &[f64], rows: usize, cols: usize, kernel: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as isize;
    let mut tmp = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            let mut acc = 0.0;
            for (t, &w) in kernel.iter().enumerate() {
                let ii = reflect(i as isize + t as isize - half, rows);
                acc += w * src[j * rows + ii];
            }
            tmp[j * rows + i] = acc;
        }
    }
    let mut out = vec![0.0; rows * cols];
    for j in 0..cols {
        for i in 0..rows {
            let mut acc = 0.0;
            for (t, &w) in kernel.iter().enumerate() {
                let jj = reflect(j as isize + t as isize - half, cols);
                acc += w * tmp[jj * rows + i];
            }
            out[j * rows + i] = acc;
        }
    }
    out
}

/// Mean local SSIM with an 11x11 Gaussian window (σ = 1.5), K1 = 0.01,
/// K2 = 0.03 and dynamic range 1.
pub fn ssim(reference: &Matrix, test: &Matrix) -> Result<f64> {
    check_shapes(reference, test)?;
    let (rows, cols) = (reference.rows(), reference.cols());
    if rows < SSIM_WINDOW || cols < SSIM_WINDOW {
        return Err(Error::Shape(format!(
            "SSIM needs slices of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {rows}x{cols}"
        )));
    }
    let kernel = gaussian_kernel();
    let x = reference.as_slice();
    let y = test.as_slice();
    let xx: Vec<f64> = x.iter().map(|v| v * v).collect();
    let yy: Vec<f64> = y.iter().map(|v| v * v).collect();
    let xy: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();

    let mu_x = blur(x, rows, cols, &kernel);
    let mu_y = blur(y, rows, cols, &kernel);
    let e_xx = blur(&xx, rows, cols, &kernel);
    let e_yy = blur(&yy, rows, cols, &kernel);
    let e_xy = blur(&xy, rows, cols, &kernel);

    let c1 = (SSIM_K1 * SSIM_RANGE).powi(2);
    let c2 = (SSIM_K2 * SSIM_RANGE).powi(2);
    let mut total = 0.0;
    for p in 0..rows * cols {
        let (mx, my) = (mu_x[p], mu_y[p]);
        let var_x = e_xx[p] - mx * mx;
        let var_y = e_yy[p] - my * my;
        let cov = e_xy[p] - mx * my;
        let num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
        let den = (mx * mx + my * my + c1) * (var_x + var_y + c2);
        total += num / den;
    }
    Ok(total / (rows * cols) as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QualityReport {
    pub psnr: Vec<f64>,
    pub ssim: Vec<f64>,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
}

impl QualityReport {
    /// `slice,psnr,ssim` rows followed by a `mean` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slice,psnr,ssim\n");
        for (k, (p, s)) in self.psnr.iter().zip(&self.ssim).enumerate() {
            let _ = writeln!(out, "{},{:.6},{:.6}", k + 1, p, s);
        }
        let _ = writeln!(out, "mean,{:.6},{:.6}", self.mean_psnr, self.mean_ssim);
        out
    }
}

/// PSNR and SSIM of every frontal slice, with arithmetic means.
pub fn quality_report(reference: &Tensor3, test: &Tensor3, peak: f64) -> Result<QualityReport> {
    if reference.dims() != test.dims() {
        return Err(Error::Shape(format!(
            "reference {:?} vs test {:?}",
            reference.dims(),
            test.dims()
        )));
    }
    let mut psnrs = Vec::with_capacity(reference.n3());
    let mut ssims = Vec::with_capacity(reference.n3());
    for k in 0..reference.n3() {
        let (a, b) = (reference.frontal_slice(k), test.frontal_slice(k));
        psnrs.push(psnr(&a, &b, peak)?);
        ssims.push(ssim(&a, &b)?);
    }
    let n = reference.n3() as f64;
    Ok(QualityReport {
        mean_psnr: psnrs.iter().sum::<f64>() / n,
        mean_ssim: ssims.iter().sum::<f64>() / n,
        psnr: psnrs,
        ssim: ssims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(rows: usize, cols: usize) -> Matrix {
        let mut m = Matrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = ((i * 3 + j * 7) % 13) as f64 / 13.0;
            }
        }
        m
    }

    #[test]
    fn psnr_cases() {
        let a = ramp(8, 9);
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), PSNR_CAP_DB);
        let mut b = a.clone();
        b.as_mut_slice().iter_mut().for_each(|v| *v += 0.1);
        assert!((psnr(&a, &b, 1.0).unwrap() - 20.0).abs() < 1e-9);
        assert!(psnr(&a, &ramp(9, 8), 1.0).is_err());
        assert!(psnr(&a, &b, 0.0).is_err());
    }

    #[test]
    fn ssim_identical_and_constant() {
        let a = ramp(16, 12);
        assert_eq!(ssim(&a, &a).unwrap(), 1.0);
        let mut c = Matrix::zeros(12, 12);
        c.as_mut_slice().iter_mut().for_each(|v| *v = 0.5);
        assert_eq!(ssim(&c, &c).unwrap(), 1.0);
        assert!(ssim(&ramp(10, 12), &ramp(10, 12)).is_err());
    }

    #[test]
    fn reflect_indices() {
        let got: Vec<usize> = (-3..7).map(|i| reflect(i, 4)).collect();
        assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1]);
    }

    #[test]
    fn report_csv_has_mean_row() {
        let x = Tensor3::from_fn(11, 11, 2, |i, j, k| ((i + j + k) % 5) as f64 / 5.0);
        let r = quality_report(&x, &x, 1.0).unwrap();
        assert_eq!(r.mean_psnr, PSNR_CAP_DB);
        let csv = r.to_csv();
        assert!(csv.starts_with("slice,psnr,ssim\n1,"));
        assert!(csv.ends_with("mean,99.000000,1.000000\n"));
    }
}
