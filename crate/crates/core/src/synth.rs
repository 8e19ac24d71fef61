//! Seeded synthetic data: low-tubal-rank tensors, smooth-tube tensors,
//! sampling masks and salt-and-pepper corruption.
//!
//! Every generator draws from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha),
//! so outputs are a pure function of the arguments on every platform.

use std::f64::consts::PI;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::{tprod, Mask, Tensor3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    TubalLowRank { rank: usize },
    /// Each tube mixes `bandwidth` low-frequency cosines; 1 gives constant tubes.
    Smooth { bandwidth: usize },
    /// Each tube is piecewise linear over `segments` random pieces.
    PiecewiseSmooth { segments: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SynthSpec {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub kind: SynthKind,
    pub seed: u64,
}

impl SynthSpec {
    pub fn generate(&self) -> Result<Tensor3> {
        check_dims(self.n1, self.n2, self.n3)?;
        match self.kind {
            SynthKind::TubalLowRank { rank } => {
                gen_tubal_lowrank(self.n1, self.n2, self.n3, rank, self.seed).map(|g| g.tensor)
            }
            SynthKind::Smooth { bandwidth } => {
                gen_smooth(self.n1, self.n2, self.n3, bandwidth, self.seed)
            }
            SynthKind::PiecewiseSmooth { segments } => {
                gen_piecewise_smooth(self.n1, self.n2, self.n3, segments, self.seed)
            }
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_dims(n1: usize, n2: usize, n3: usize) -> Result<()> {
    if n1 == 0 || n2 == 0 || n3 == 0 {
        return Err(Error::Config(format!("extents must be positive, got {n1}x{n2}x{n3}")));
    }
    Ok(())
}

fn gaussian_tensor(rng: &mut ChaCha8Rng, n1: usize, n2: usize, n3: usize) -> Tensor3 {
    let data = (0..n1 * n2 * n3).map(|_| rng.sample(StandardNormal)).collect();
    Tensor3::from_vec(n1, n2, n3, data).expect("extents checked")
}

/// Affine map `v -> offset + scale · v` taking the tensor's range onto [0, 1].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rescale {
    pub offset: f64,
    pub scale: f64,
}

impl Rescale {
    pub fn to_unit(x: &Tensor3) -> Self {
        let (lo, hi) = x.min_max();
        let span = hi - lo;
        if span > 0.0 {
            Self {
                offset: -lo / span,
                scale: 1.0 / span,
            }
        } else {
            // constant tensor maps to 0.5
            Self {
                offset: 0.5 - lo,
                scale: 1.0,
            }
        }
    }

    pub fn apply(&self, x: &Tensor3) -> Tensor3 {
        x.map(|v| (self.offset + self.scale * v).clamp(0.0, 1.0))
    }
}

/// Low-tubal-rank ground truth together with its generating factors.
#[derive(Clone, Debug)]
pub struct TubalLowRank {
    pub tensor: Tensor3,
    /// `n1 x r x n3`
    pub left: Tensor3,
    /// `r x n2 x n3`
    pub right: Tensor3,
    pub rescale: Rescale,
}

/// `rescale(A * B)` with standard normal factors of inner size `rank`.
pub fn gen_tubal_lowrank(n1: usize, n2: usize, n3: usize, rank: usize, seed: u64) -> Result<TubalLowRank> {
    check_dims(n1, n2, n3)?;
    if rank == 0 || rank > n1.min(n2) {
        return Err(Error::Config(format!(
            "tubal rank must be in 1..={}, got {rank}",
            n1.min(n2)
        )));
    }
    let mut rng = rng(seed);
    let left = gaussian_tensor(&mut rng, n1, rank, n3);
    let right = gaussian_tensor(&mut rng, rank, n2, n3);
    let raw = tprod(&left, &right)?;
    let rescale = Rescale::to_unit(&raw);
    Ok(TubalLowRank {
        tensor: rescale.apply(&raw),
        left,
        right,
        rescale,
    })
}

pub fn gen_smooth(n1: usize, n2: usize, n3: usize, bandwidth: usize, seed: u64) -> Result<Tensor3> {
    check_dims(n1, n2, n3)?;
    if bandwidth == 0 {
        return Err(Error::Config("bandwidth must be at least 1".into()));
    }
    let mut rng = rng(seed);
    let coeffs = gaussian_tensor(&mut rng, n1, n2, bandwidth);
    let basis: Vec<Vec<f64>> = (0..bandwidth)
        .map(|b| {
            (0..n3)
                .map(|k| (PI * b as f64 * (k as f64 + 0.5) / n3 as f64).cos())
                .collect()
        })
        .collect();
    let raw = Tensor3::from_fn(n1, n2, n3, |i, j, k| {
        (0..bandwidth).map(|b| coeffs.get(i, j, b) * basis[b][k]).sum()
    });
    Ok(Rescale::to_unit(&raw).apply(&raw))
}

pub fn gen_piecewise_smooth(n1: usize, n2: usize, n3: usize, segments: usize, seed: u64) -> Result<Tensor3> {
    check_dims(n1, n2, n3)?;
    if segments == 0 || segments > n3 {
        return Err(Error::Config(format!("segments must be in 1..={n3}, got {segments}")));
    }
    let mut rng = rng(seed);
    let mut raw = Tensor3::zeros(n1, n2, n3);
    for j in 0..n2 {
        for i in 0..n1 {
            let mut cuts: Vec<usize> = index::sample(&mut rng, n3 - 1, segments - 1)
                .into_iter()
                .map(|c| c + 1)
                .collect();
            cuts.sort_unstable();
            cuts.push(n3);
            let mut begin = 0;
            for &end in &cuts {
                let level: f64 = rng.sample(StandardNormal);
                let slope: f64 = rng.sample(StandardNormal);
                for k in begin..end {
                    raw.set(i, j, k, level + slope * (k - begin) as f64 / n3 as f64);
                }
                begin = end;
            }
        }
    }
    Ok(Rescale::to_unit(&raw).apply(&raw))
}

/// `round(sr · n1 n2 n3)` distinct offsets drawn uniformly, sorted.
pub fn gen_mask(n1: usize, n2: usize, n3: usize, sr: f64, seed: u64) -> Result<Mask> {
    check_dims(n1, n2, n3)?;
    if !(sr > 0.0 && sr <= 1.0) {
        return Err(Error::Config(format!("sampling rate must be in (0, 1], got {sr}")));
    }
    let total = n1 * n2 * n3;
    let count = ((sr * total as f64).round() as usize).min(total);
    let mut rng = rng(seed);
    let mut picked = index::sample(&mut rng, total, count).into_vec();
    picked.sort_unstable();
    Mask::new(n1, n2, n3, picked)
}

/// Sets `round(rho · N)` uniformly chosen entries to 0 or 1 (fair coin).
/// Returns the corrupted tensor and the corrupted offsets.
pub fn add_salt_pepper(x: &Tensor3, rho: f64, seed: u64) -> Result<(Tensor3, Mask)> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::Config(format!("corruption ratio must be in (0, 1], got {rho}")));
    }
    let total = x.len();
    let count = ((rho * total as f64).round() as usize).min(total);
    let mut rng = rng(seed);
    let mut picked = index::sample(&mut rng, total, count).into_vec();
    picked.sort_unstable();
    let mut out = x.clone();
    for &o in &picked {
        out.as_mut_slice()[o] = if rng.random::<bool>() { 1.0 } else { 0.0 };
    }
    let (n1, n2, n3) = x.dims();
    Ok((out, Mask::new(n1, n2, n3, picked)?))
}
