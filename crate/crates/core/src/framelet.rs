//! Undecimated multi-level B-spline framelets along the third mode.
//!
//! Level `j` (1-based) convolves the previous lowpass output with every filter
//! of the bank dilated by `2^(j-1)`, using periodic boundaries. Output bands are
//! ordered `[level 1 highpass..., level l highpass..., level l lowpass]`, which
//! gives `w = (r - 1) l + 1` bands of full length `n`. The analysis operator `W`
//! satisfies `WᵀW = I`; `WWᵀ` is not the identity.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::{Matrix, Tensor3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterBank {
    Haar,
    Linear,
    Cubic,
}

impl FilterBank {
    pub const ALL: [FilterBank; 3] = [FilterBank::Haar, FilterBank::Linear, FilterBank::Cubic];

    /// Lowpass filter first, then the highpass filters.
    pub fn filters(self) -> Vec<Vec<f64>> {
        match self {
            FilterBank::Haar => vec![vec![0.5, 0.5], vec![0.5, -0.5]],
            FilterBank::Linear => {
                let s = SQRT_2 / 4.0;
                vec![
                    vec![0.25, 0.5, 0.25],
                    vec![s, 0.0, -s],
                    vec![-0.25, 0.5, -0.25],
                ]
            }
            FilterBank::Cubic => {
                let s = 6f64.sqrt() / 16.0;
                vec![
                    [1.0, 4.0, 6.0, 4.0, 1.0].map(|v| v / 16.0).to_vec(),
                    [-1.0, -2.0, 0.0, 2.0, 1.0].map(|v| v / 8.0).to_vec(),
                    [1.0, 0.0, -2.0, 0.0, 1.0].map(|v| v * s).to_vec(),
                    [-1.0, 2.0, 0.0, -2.0, 1.0].map(|v| v / 8.0).to_vec(),
                    [1.0, -4.0, 6.0, -4.0, 1.0].map(|v| v / 16.0).to_vec(),
                ]
            }
        }
    }

    /// Number of filters `r`.
    pub fn filter_count(self) -> usize {
        match self {
            FilterBank::Haar => 2,
            FilterBank::Linear => 3,
            FilterBank::Cubic => 5,
        }
    }

    pub fn tap_count(self) -> usize {
        match self {
            FilterBank::Haar => 2,
            FilterBank::Linear => 3,
            FilterBank::Cubic => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FilterBank::Haar => "haar",
            FilterBank::Linear => "linear",
            FilterBank::Cubic => "cubic",
        }
    }

    /// Support of the level-`levels` dilated lowpass filter; the shortest
    /// signal the checked constructor accepts.
    pub fn min_signal_len(self, levels: usize) -> usize {
        let dilation = 1usize << (levels.saturating_sub(1)).min(40);
        ((self.tap_count() - 1) * dilation + 1).max(2)
    }

    /// Largest `|(AᵀA − I)_ij|` for the single-level circular analysis matrix
    /// of length `n`.
    pub fn tightness_defect(self, n: usize) -> f64 {
        let sys = FrameletSystem {
            bank: self,
            levels: 1,
            signal_len: n,
        };
        gram_defect(&sys.dense_matrix())
    }
}

impl fmt::Display for FilterBank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterBank {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(FilterBank::Haar),
            "linear" => Ok(FilterBank::Linear),
            "cubic" => Ok(FilterBank::Cubic),
            other => Err(Error::Config(format!(
                "unknown filter bank '{other}' (expected haar, linear or cubic)"
            ))),
        }
    }
}

/// `max |(AᵀA − I)_ij|` for a dense analysis matrix `a`.
pub fn gram_defect(a: &Matrix) -> f64 {
    let gram = a.transpose().matmul(a).expect("square gram");
    gram.max_abs_diff(&Matrix::identity(a.cols()))
}

/// A filter bank, a level count and the signal length it acts on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameletSystem {
    bank: FilterBank,
    levels: usize,
    signal_len: usize,
}

impl FrameletSystem {
    /// Rejects signals shorter than the support of the dilated lowpass filter.
    pub fn new(bank: FilterBank, levels: usize, n: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Config("framelet level must be at least 1".into()));
        }
        let min = bank.min_signal_len(levels);
        if n < min {
            return Err(Error::Config(format!(
                "{bank} framelet with {levels} level(s) needs a third dimension of at least {min}, got {n}"
            )));
        }
        Ok(Self {
            bank,
            levels,
            signal_len: n,
        })
    }

    /// Like [`FrameletSystem::new`] but lets dilated taps wrap around a short
    /// signal more than once. The operator is still a tight frame.
    pub fn new_wrapping(bank: FilterBank, levels: usize, n: usize) -> Result<Self> {
        if levels == 0 || n == 0 {
            return Err(Error::Config("framelet level and length must be positive".into()));
        }
        Ok(Self {
            bank,
            levels,
            signal_len: n,
        })
    }

    pub fn bank(&self) -> FilterBank {
        self.bank
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    /// `w = (r − 1) l + 1`.
    pub fn band_count(&self) -> usize {
        (self.bank.filter_count() - 1) * self.levels + 1
    }

    pub fn output_len(&self) -> usize {
        self.band_count() * self.signal_len
    }

    /// Applies `W` to a single tube.
    pub fn analyze_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.signal_len {
            return Err(Error::Shape(format!(
                "signal of length {} for a system built for {}",
                v.len(),
                self.signal_len
            )));
        }
        let mut out = vec![0.0; self.output_len()];
        self.analyze_slices(v, &mut out, 1);
        Ok(out)
    }

    /// Applies `Wᵀ` to a single transformed tube.
    pub fn synthesize_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.output_len() {
            return Err(Error::Shape(format!(
                "coefficients of length {}, expected {}",
                y.len(),
                self.output_len()
            )));
        }
        let mut out = vec![0.0; self.signal_len];
        self.synthesize_slices(y, &mut out, 1);
        Ok(out)
    }

    /// `𝒳_W = fold3(W X(3))`, of size `n1 x n2 x (w n3)`.
    pub fn analyze(&self, x: &Tensor3) -> Result<Tensor3> {
        if x.n3() != self.signal_len {
            return Err(Error::Shape(format!(
                "tensor has n3 = {}, framelet system built for {}",
                x.n3(),
                self.signal_len
            )));
        }
        let mut out = Tensor3::zeros(x.n1(), x.n2(), self.output_len());
        self.analyze_slices(x.as_slice(), out.as_mut_slice(), x.slice_len());
        Ok(out)
    }

    /// `fold3(Wᵀ Y(3))`, of size `n1 x n2 x n3`.
    pub fn synthesize(&self, y: &Tensor3) -> Result<Tensor3> {
        if y.n3() != self.output_len() {
            return Err(Error::Shape(format!(
                "transformed tensor has n3 = {}, expected {}",
                y.n3(),
                self.output_len()
            )));
        }
        let mut out = Tensor3::zeros(y.n1(), y.n2(), self.signal_len);
        self.synthesize_slices(y.as_slice(), out.as_mut_slice(), y.slice_len());
        Ok(out)
    }

    /// The explicit `(w n) x n` analysis matrix.
    pub fn dense_matrix(&self) -> Matrix {
        let n = self.signal_len;
        let mut w = Matrix::zeros(self.output_len(), n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; self.output_len()];
        for j in 0..n {
            e[j] = 1.0;
            col.iter_mut().for_each(|c| *c = 0.0);
            self.analyze_slices(&e, &mut col, 1);
            for (i, &v) in col.iter().enumerate() {
                w[(i, j)] = v;
            }
            e[j] = 0.0;
        }
        w
    }

    // `src` and `dst` are sequences of slices of length `s`; `src` has `n`
    // slices and `dst` has `w n`.
    fn analyze_slices(&self, src: &[f64], dst: &mut [f64], s: usize) {
        let n = self.signal_len;
        let filters = self.bank.filters();
        let r = filters.len();
        let block = n * s;
        let mut low = src.to_vec();
        let mut next = vec![0.0; block];
        for level in 0..self.levels {
            let dilation = 1usize << level;
            for (b, h) in filters.iter().enumerate().skip(1) {
                let band = level * (r - 1) + (b - 1);
                let out = &mut dst[band * block..(band + 1) * block];
                correlate(&low, out, s, n, h, dilation);
            }
            next.iter_mut().for_each(|v| *v = 0.0);
            correlate(&low, &mut next, s, n, &filters[0], dilation);
            std::mem::swap(&mut low, &mut next);
        }
        let last = self.band_count() - 1;
        dst[last * block..(last + 1) * block].copy_from_slice(&low);
    }

    fn synthesize_slices(&self, src: &[f64], dst: &mut [f64], s: usize) {
        let n = self.signal_len;
        let filters = self.bank.filters();
        let r = filters.len();
        let block = n * s;
        let last = self.band_count() - 1;
        let mut low = src[last * block..(last + 1) * block].to_vec();
        let mut acc = vec![0.0; block];
        for level in (0..self.levels).rev() {
            let dilation = 1usize << level;
            acc.iter_mut().for_each(|v| *v = 0.0);
            correlate_adjoint(&low, &mut acc, s, n, &filters[0], dilation);
            for (b, h) in filters.iter().enumerate().skip(1) {
                let band = level * (r - 1) + (b - 1);
                correlate_adjoint(&src[band * block..(band + 1) * block], &mut acc, s, n, h, dilation);
            }
            std::mem::swap(&mut low, &mut acc);
        }
        dst.copy_from_slice(&low);
    }
}

/// Circular shift of tap `t` relative to slice `k`, as a nonnegative offset mod `n`.
#[inline]
fn tap_shift(t: usize, anchor: usize, dilation: usize, n: usize) -> usize {
    let fwd = (t * dilation) % n;
    let back = (anchor * dilation) % n;
    (fwd + n - back) % n
}

/// `dst_k += Σ_t h[t] · src_{(k + d(t − c)) mod n}` slice-wise.
fn correlate(src: &[f64], dst: &mut [f64], s: usize, n: usize, h: &[f64], dilation: usize) {
    let anchor = (h.len() - 1) / 2;
    for (t, &coef) in h.iter().enumerate() {
        if coef == 0.0 {
            continue;
        }
        let shift = tap_shift(t, anchor, dilation, n);
        for k in 0..n {
            let m = (k + shift) % n;
            let (from, to) = (&src[m * s..(m + 1) * s], &mut dst[k * s..(k + 1) * s]);
            for (d, &v) in to.iter_mut().zip(from) {
                *d += coef * v;
            }
        }
    }
}

/// Adjoint of [`correlate`]: `dst_{(k + d(t − c)) mod n} += h[t] · src_k`.
fn correlate_adjoint(src: &[f64], dst: &mut [f64], s: usize, n: usize, h: &[f64], dilation: usize) {
    let anchor = (h.len() - 1) / 2;
    for (t, &coef) in h.iter().enumerate() {
        if coef == 0.0 {
            continue;
        }
        let shift = tap_shift(t, anchor, dilation, n);
        for k in 0..n {
            let m = (k + shift) % n;
            let (from, to) = (&src[k * s..(k + 1) * s], &mut dst[m * s..(m + 1) * s]);
            for (d, &v) in to.iter_mut().zip(from) {
                *d += coef * v;
            }
        }
    }
}
