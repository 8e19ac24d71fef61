//! Dense third-order tensors and the mode-3 algebra the solvers are built on.
//!
//! Elements are stored with `i` fastest, then `j`, then `k`, so every frontal
//! slice `X(:,:,k)` is a contiguous column-major `n1 x n2` block and a mode-3
//! linear map is a linear combination of whole slices.

mod mask;
mod matrix;
mod prox;

pub use mask::Mask;
pub use matrix::Matrix;
pub use prox::{nuclear_norm, soft_threshold, soft_threshold_scalar, svd, svt, Svd};

use crate::error::{shape_err, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    n1: usize,
    n2: usize,
    n3: usize,
    data: Vec<f64>,
}

/// Frobenius, entrywise l1 and max-abs norms of a tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms {
    pub fro: f64,
    pub l1: f64,
    pub linf: f64,
}

impl Tensor3 {
    pub fn zeros(n1: usize, n2: usize, n3: usize) -> Self {
        Self {
            n1,
            n2,
            n3,
            data: vec![0.0; n1 * n2 * n3],
        }
    }

    pub fn from_vec(n1: usize, n2: usize, n3: usize, data: Vec<f64>) -> Result<Self> {
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return shape_err(format!("extents must be positive, got {n1}x{n2}x{n3}"));
        }
        if data.len() != n1 * n2 * n3 {
            return shape_err(format!(
                "{} values cannot fill a {n1}x{n2}x{n3} tensor",
                data.len()
            ));
        }
        Ok(Self { n1, n2, n3, data })
    }

    pub fn from_fn(n1: usize, n2: usize, n3: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(n1, n2, n3);
        for k in 0..n3 {
            for j in 0..n2 {
                for i in 0..n1 {
                    t.data[(k * n2 + j) * n1 + i] = f(i, j, k);
                }
            }
        }
        t
    }

    /// Builds a tensor from frontal slices, each `n1 x n2`.
    pub fn from_slices(slices: &[Matrix]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::Shape("no slices given".into()))?;
        let (n1, n2) = (first.rows(), first.cols());
        let mut data = Vec::with_capacity(n1 * n2 * slices.len());
        for s in slices {
            if s.rows() != n1 || s.cols() != n2 {
                return shape_err("frontal slices differ in shape");
            }
            data.extend_from_slice(s.as_slice());
        }
        Self::from_vec(n1, n2, slices.len(), data)
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.n3)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n3(&self) -> usize {
        self.n3
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn slice_len(&self) -> usize {
        self.n1 * self.n2
    }

    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n2 + j) * self.n1 + i
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Raw column-major data of frontal slice `k`.
    pub fn slice(&self, k: usize) -> &[f64] {
        let s = self.slice_len();
        &self.data[k * s..(k + 1) * s]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [f64] {
        let s = self.slice_len();
        &mut self.data[k * s..(k + 1) * s]
    }

    pub fn slices(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.slice_len())
    }

    pub fn slices_mut(&mut self) -> std::slice::ChunksExactMut<'_, f64> {
        let s = self.slice_len();
        self.data.chunks_exact_mut(s)
    }

    pub fn frontal_slice(&self, k: usize) -> Matrix {
        Matrix::from_col_major(self.n1, self.n2, self.slice(k).to_vec())
            .expect("slice length matches extents")
    }

    pub fn tube(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.n3).map(|k| self.get(i, j, k)).collect()
    }

    pub fn same_shape(&self, other: &Tensor3) -> bool {
        self.dims() == other.dims()
    }

    fn check_same_shape(&self, other: &Tensor3) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            shape_err(format!("{:?} vs {:?}", self.dims(), other.dims()))
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor3 {
        Tensor3 {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    pub fn zip_map(&self, other: &Tensor3, f: impl Fn(f64, f64) -> f64) -> Result<Tensor3> {
        self.check_same_shape(other)?;
        Ok(Tensor3 {
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
            ..*self
        })
    }

    pub fn add(&self, other: &Tensor3) -> Result<Tensor3> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, alpha: f64) -> Tensor3 {
        self.map(|v| alpha * v)
    }

    /// `self += alpha * other`
    pub fn axpy(&mut self, alpha: f64, other: &Tensor3) -> Result<()> {
        self.check_same_shape(other)?;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn dot(&self, other: &Tensor3) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norms(&self) -> Norms {
        let mut sq = 0.0;
        let mut l1 = 0.0;
        let mut linf = 0.0f64;
        for &v in &self.data {
            sq += v * v;
            l1 += v.abs();
            linf = linf.max(v.abs());
        }
        Norms {
            fro: sq.sqrt(),
            l1,
            linf,
        }
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `‖self − other‖_∞`; shapes must agree.
    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        debug_assert!(self.same_shape(other));
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Cyclic dimension shift `(n1, n2, n3) -> (n2, n3, n1)`, i.e. `y(j,k,i) = x(i,j,k)`.
    pub fn shift_dims(&self) -> Tensor3 {
        let mut out = Tensor3::zeros(self.n2, self.n3, self.n1);
        for k in 0..self.n3 {
            for j in 0..self.n2 {
                for i in 0..self.n1 {
                    out.set(j, k, i, self.get(i, j, k));
                }
            }
        }
        out
    }

    /// Inverse of [`Tensor3::shift_dims`].
    pub fn unshift_dims(&self) -> Tensor3 {
        let mut out = Tensor3::zeros(self.n3, self.n1, self.n2);
        for k in 0..self.n3 {
            for j in 0..self.n2 {
                for i in 0..self.n1 {
                    out.set(k, i, j, self.get(i, j, k));
                }
            }
        }
        out
    }
}

/// Mode-3 unfolding: an `n3 x (n1 n2)` matrix whose entry `(k, l)` holds
/// `x(i, j, k)` with `l = j n1 + i` (zero-based).
pub fn unfold3(x: &Tensor3) -> Matrix {
    let s = x.slice_len();
    let mut m = Matrix::zeros(x.n3, s);
    for (k, slice) in x.slices().enumerate() {
        for (l, &v) in slice.iter().enumerate() {
            m[(k, l)] = v;
        }
    }
    m
}

/// Inverse of [`unfold3`].
pub fn fold3(m: &Matrix, n1: usize, n2: usize) -> Result<Tensor3> {
    if m.cols() != n1 * n2 || m.rows() == 0 || n1 == 0 || n2 == 0 {
        return shape_err(format!(
            "cannot fold a {}x{} matrix into {n1}x{n2} slices",
            m.rows(),
            m.cols()
        ));
    }
    let mut x = Tensor3::zeros(n1, n2, m.rows());
    for k in 0..m.rows() {
        for (l, v) in x.slice_mut(k).iter_mut().enumerate() {
            *v = m[(k, l)];
        }
    }
    Ok(x)
}

/// Mode-3 tensor-matrix product: `Y(3) = A · X(3)`, so output slice `k` is
/// `Σ_n a[k,n] · X(:,:,n)`.
pub fn mode3_product(x: &Tensor3, a: &Matrix) -> Result<Tensor3> {
    if a.cols() != x.n3 {
        return shape_err(format!(
            "matrix has {} columns, tensor has n3 = {}",
            a.cols(),
            x.n3
        ));
    }
    let mut y = Tensor3::zeros(x.n1, x.n2, a.rows());
    for (k, out) in y.slices_mut().enumerate() {
        for n in 0..x.n3 {
            let c = a[(k, n)];
            if c == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(x.slice(n)) {
                *o += c * v;
            }
        }
    }
    Ok(y)
}

/// Tensor-tensor product: tube `(i, j)` of the result is
/// `Σ_p circconv(a(i,p,:), b(p,j,:))`, computed slice-wise as
/// `C_k = Σ_t A_t · B_{(k − t) mod n3}`.
pub fn tprod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    if a.n2 != b.n1 || a.n3 != b.n3 {
        return shape_err(format!(
            "t-product of {:?} and {:?}",
            a.dims(),
            b.dims()
        ));
    }
    let n3 = a.n3;
    let (m, p, q) = (a.n1, a.n2, b.n2);
    let mut c = Tensor3::zeros(m, q, n3);
    for k in 0..n3 {
        let out = c.slice_mut(k);
        for t in 0..n3 {
            let at = a.slice(t);
            let bt = b.slice((k + n3 - t) % n3);
            for j in 0..q {
                let dst = &mut out[j * m..(j + 1) * m];
                for r in 0..p {
                    let coef = bt[j * p + r];
                    if coef == 0.0 {
                        continue;
                    }
                    for (d, &v) in dst.iter_mut().zip(&at[r * m..(r + 1) * m]) {
                        *d += coef * v;
                    }
                }
            }
        }
    }
    Ok(c)
}

/// Identity tensor for the t-product: first frontal slice is `I_n`, the rest zero.
pub fn identity_tensor(n: usize, n3: usize) -> Tensor3 {
    let mut t = Tensor3::zeros(n, n, n3);
    for i in 0..n {
        t.set(i, i, 0, 1.0);
    }
    t
}

fn check_mask(x: &Tensor3, m: &Mask) -> Result<()> {
    if x.dims() != m.dims() {
        return shape_err(format!("tensor {:?} vs mask {:?}", x.dims(), m.dims()));
    }
    Ok(())
}

/// `P_Ω(x)`: keeps entries on the mask, zeros elsewhere.
pub fn project_mask(x: &Tensor3, m: &Mask) -> Result<Tensor3> {
    check_mask(x, m)?;
    let mut out = Tensor3::zeros(x.n1, x.n2, x.n3);
    for &o in m.indices() {
        out.data[o] = x.data[o];
    }
    Ok(out)
}

/// `P_{Ω^c}(x) = x − P_Ω(x)`.
pub fn project_complement(x: &Tensor3, m: &Mask) -> Result<Tensor3> {
    check_mask(x, m)?;
    let mut out = x.clone();
    for &o in m.indices() {
        out.data[o] = 0.0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unfold_places_entry_per_index_formula() {
        // 1-based (2,3,1) -> matrix (1, (3-1)*4+2) = (1,10)
        let mut x = Tensor3::zeros(4, 3, 2);
        x.set(1, 2, 0, 7.5);
        let m = unfold3(&x);
        assert_eq!((m.rows(), m.cols()), (2, 12));
        assert_eq!(m[(0, 9)], 7.5);
        assert_eq!(m.as_slice().iter().filter(|&&v| v != 0.0).count(), 1);
    }

    #[test]
    fn unfold_zero_tensor() {
        let m = unfold3(&Tensor3::zeros(3, 2, 5));
        assert_eq!((m.rows(), m.cols()), (5, 6));
        assert!(m.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn fold_single_entry_and_errors() {
        let m = Matrix::from_col_major(1, 1, vec![3.25]).unwrap();
        let x = fold3(&m, 1, 1).unwrap();
        assert_eq!(x.dims(), (1, 1, 1));
        assert_eq!(x.get(0, 0, 0), 3.25);
        assert!(fold3(&Matrix::zeros(2, 6), 4, 2).is_err());
    }

    #[test]
    fn mode3_identity_and_sum() {
        let x = Tensor3::from_fn(2, 3, 4, |i, j, k| (i + 10 * j) as f64 - 0.5 * k as f64);
        assert_eq!(mode3_product(&x, &Matrix::identity(4)).unwrap(), x);
        let ones = Matrix::from_col_major(1, 4, vec![1.0; 4]).unwrap();
        let s = mode3_product(&x, &ones).unwrap();
        for j in 0..3 {
            for i in 0..2 {
                let want: f64 = (0..4).map(|k| x.get(i, j, k)).sum();
                assert_eq!(s.get(i, j, 0), want);
            }
        }
        assert!(mode3_product(&x, &Matrix::identity(3)).is_err());
    }

    #[test]
    fn tprod_with_identity_and_matrix_case() {
        let a = Tensor3::from_fn(3, 2, 4, |i, j, k| (i as f64 - j as f64) * (k as f64 + 0.5));
        assert_eq!(tprod(&a, &identity_tensor(2, 4)).unwrap(), a);
        assert_eq!(tprod(&identity_tensor(3, 4), &a).unwrap(), a);

        let p = Tensor3::from_fn(2, 3, 1, |i, j, _| (i * 3 + j) as f64);
        let q = Tensor3::from_fn(3, 2, 1, |i, j, _| (i as f64) - (j as f64));
        let c = tprod(&p, &q).unwrap();
        let want = p.frontal_slice(0).matmul(&q.frontal_slice(0)).unwrap();
        assert_eq!(c.frontal_slice(0), want);
        assert!(tprod(&p, &p).is_err());
    }

    #[test]
    fn mask_projections() {
        let x = Tensor3::from_fn(2, 2, 2, |i, j, k| 1.0 + (i + 2 * j + 4 * k) as f64);
        let full = Mask::full(2, 2, 2);
        let empty = Mask::empty(2, 2, 2);
        assert_eq!(project_mask(&x, &full).unwrap(), x);
        assert_eq!(project_mask(&x, &empty).unwrap(), Tensor3::zeros(2, 2, 2));
        let m = Mask::new(2, 2, 2, vec![0, 3, 6]).unwrap();
        let sum = project_mask(&x, &m)
            .unwrap()
            .add(&project_complement(&x, &m).unwrap())
            .unwrap();
        assert_eq!(sum, x);
        assert!(project_mask(&x, &Mask::full(2, 2, 3)).is_err());
    }

    #[test]
    fn norms_closed_forms() {
        let z = Tensor3::zeros(2, 3, 2).norms();
        assert_eq!((z.fro, z.l1, z.linf), (0.0, 0.0, 0.0));
        let mut x = Tensor3::zeros(2, 3, 2);
        x.set(1, 1, 1, 2.0);
        let n = x.norms();
        assert_eq!((n.fro, n.l1, n.linf), (2.0, 2.0, 2.0));
        let ones = Tensor3::from_fn(2, 2, 2, |_, _, _| 1.0).norms();
        assert_eq!(ones.fro, 8f64.sqrt());
        assert_eq!(ones.l1, 8.0);
        assert_eq!(ones.linf, 1.0);
    }

    #[test]
    fn shift_dims_round_trip() {
        let x = Tensor3::from_fn(4, 3, 2, |i, j, k| (i * 100 + j * 10 + k) as f64);
        let y = x.shift_dims();
        assert_eq!(y.dims(), (3, 2, 4));
        assert_eq!(y.get(2, 1, 3), x.get(3, 2, 1));
        assert_eq!(y.unshift_dims(), x);
    }
}
