//! Transform-domain rank diagnostics: per-slice singular value spectra,
//! truncated multi-rank and magnitude histograms.

use rayon::prelude::*;

use crate::error::Result;
use crate::framelet::FrameletSystem;
use crate::tensor::{svd, Matrix, Tensor3};
use crate::transform::Transform;

/// Upper edges of the histogram bins `[0,1e-2], (1e-2,1e-1], (1e-1,1], (1,∞)`.
pub const BIN_EDGES: [f64; 3] = [1e-2, 1e-1, 1.0];
pub const BIN_LABELS: [&str; 4] = ["[0,1e-2]", "(1e-2,1e-1]", "(1e-1,1]", "(1,inf)"];

/// Descending singular values of every transformed frontal slice.
#[derive(Clone, Debug)]
pub struct SliceSpectra {
    pub values: Vec<Vec<f64>>,
}

impl SliceSpectra {
    pub fn compute(y: &Tensor3) -> Result<Self> {
        let (n1, n2) = (y.n1(), y.n2());
        let values = y
            .as_slice()
            .par_chunks_exact(y.slice_len())
            .map(|s| {
                if s.iter().all(|&v| v == 0.0) {
                    return Ok(vec![0.0; n1.min(n2)]);
                }
                Ok(svd(&Matrix::from_col_major(n1, n2, s.to_vec())?)?.sigma)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values })
    }

    /// Largest singular value over all slices.
    pub fn global_max(&self) -> f64 {
        self.values
            .iter()
            .filter_map(|s| s.first().copied())
            .fold(0.0, f64::max)
    }

    /// Slice ranks keeping `σ > eps · global_max`.
    pub fn truncated_ranks(&self, eps: f64) -> Vec<usize> {
        let cut = eps * self.global_max();
        self.values
            .iter()
            .map(|s| s.iter().take_while(|&&v| v > cut).count())
            .collect()
    }

    pub fn histogram(&self) -> Histogram {
        let mut counts = [0usize; 4];
        for &v in self.values.iter().flatten() {
            let bin = BIN_EDGES.iter().position(|&e| v <= e).unwrap_or(3);
            counts[bin] += 1;
        }
        Histogram::from_counts(counts)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Histogram {
    pub counts: [usize; 4],
    pub fractions: [f64; 4],
}

impl Histogram {
    fn from_counts(counts: [usize; 4]) -> Self {
        let total: usize = counts.iter().sum();
        let mut fractions = [0.0; 4];
        if total > 0 {
            for (f, &c) in fractions.iter_mut().zip(&counts) {
                *f = c as f64 / total as f64;
            }
        }
        Self { counts, fractions }
    }
}

#[derive(Clone, Debug)]
pub struct RankSpectrum {
    pub epsilon: f64,
    pub singular_values: Vec<Vec<f64>>,
    pub truncated_ranks: Vec<usize>,
    pub mean_rank: f64,
    pub histogram: Histogram,
}

/// Truncated multi-rank of `t(x)` for each `eps`; singular values below
/// `eps` times the largest singular value over all slices are dropped.
/// Expects data scaled to [0, 1].
pub fn multi_rank_spectrum(x: &Tensor3, t: &Transform, epsilons: &[f64]) -> Result<Vec<RankSpectrum>> {
    let spectra = SliceSpectra::compute(&t.forward(x)?)?;
    let histogram = spectra.histogram();
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let ranks = spectra.truncated_ranks(eps);
            let mean = ranks.iter().sum::<usize>() as f64 / ranks.len() as f64;
            RankSpectrum {
                epsilon: eps,
                singular_values: spectra.values.clone(),
                truncated_ranks: ranks,
                mean_rank: mean,
                histogram,
            }
        })
        .collect())
}

/// Numerical rank of every framelet-transformed slice, with tolerance
/// `max(n1, n2) · σ_max · f64::EPSILON` per slice.
pub fn framelet_multi_rank(x: &Tensor3, sys: &FrameletSystem) -> Result<Vec<usize>> {
    let spectra = SliceSpectra::compute(&sys.analyze(x)?)?;
    let scale = x.n1().max(x.n2()) as f64 * f64::EPSILON;
    Ok(spectra
        .values
        .iter()
        .map(|s| {
            let top = s.first().copied().unwrap_or(0.0);
            s.iter().filter(|&&v| v > scale * top && v > 0.0).count()
        })
        .collect())
}
