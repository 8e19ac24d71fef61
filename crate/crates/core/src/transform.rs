//! Mode-3 transforms whose adjoint is a left inverse: framelets, the
//! orthonormal DCT-II, and the identity.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::framelet::{FilterBank, FrameletSystem};
use crate::tensor::{mode3_product, Matrix, Tensor3};

/// Which transform to build, independent of the signal length.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    Framelet { bank: FilterBank, levels: usize },
    Dct,
    Identity,
}

impl TransformKind {
    pub fn build(self, n: usize) -> Result<Transform> {
        Ok(match self {
            TransformKind::Framelet { bank, levels } => {
                Transform::Framelet(FrameletSystem::new(bank, levels, n)?)
            }
            TransformKind::Dct => Transform::Dct(Dct::new(n)?),
            TransformKind::Identity => {
                if n == 0 {
                    return Err(Error::Config("transform length must be positive".into()));
                }
                Transform::Identity { n }
            }
        })
    }

    pub fn label(&self) -> String {
        match self {
            TransformKind::Framelet { bank, levels } => format!("framelet-{bank}-l{levels}"),
            TransformKind::Dct => "dct".into(),
            TransformKind::Identity => "identity".into(),
        }
    }
}

/// Transform family names as accepted on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformFamily {
    Framelet,
    Dct,
    Identity,
}

impl TransformFamily {
    pub fn with_framelet(self, bank: FilterBank, levels: usize) -> TransformKind {
        match self {
            TransformFamily::Framelet => TransformKind::Framelet { bank, levels },
            TransformFamily::Dct => TransformKind::Dct,
            TransformFamily::Identity => TransformKind::Identity,
        }
    }
}

impl FromStr for TransformFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "framelet" => Ok(TransformFamily::Framelet),
            "dct" => Ok(TransformFamily::Dct),
            "identity" => Ok(TransformFamily::Identity),
            other => Err(Error::Config(format!(
                "unknown transform '{other}' (expected framelet, dct or identity)"
            ))),
        }
    }
}

impl fmt::Display for TransformFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransformFamily::Framelet => "framelet",
            TransformFamily::Dct => "dct",
            TransformFamily::Identity => "identity",
        })
    }
}

/// Orthonormal DCT-II of length `n` as a dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dct {
    matrix: Matrix,
    transpose: Matrix,
}

impl Dct {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("DCT length must be positive".into()));
        }
        let mut m = Matrix::zeros(n, n);
        let nf = n as f64;
        for k in 0..n {
            let scale = if k == 0 { (1.0 / nf).sqrt() } else { (2.0 / nf).sqrt() };
            for j in 0..n {
                m[(k, j)] = scale * (PI * (j as f64 + 0.5) * k as f64 / nf).cos();
            }
        }
        Ok(Self {
            transpose: m.transpose(),
            matrix: m,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }
}

/// A linear map along mode 3 with `adjoint(forward(x)) = x`.
#[derive(Clone, Debug, PartialEq)]
pub enum Transform {
    Framelet(FrameletSystem),
    Dct(Dct),
    Identity { n: usize },
}

impl Transform {
    pub fn signal_len(&self) -> usize {
        match self {
            Transform::Framelet(sys) => sys.signal_len(),
            Transform::Dct(d) => d.matrix.cols(),
            Transform::Identity { n } => *n,
        }
    }

    /// Output-extent multiplier `w`.
    pub fn multiplier(&self) -> usize {
        match self {
            Transform::Framelet(sys) => sys.band_count(),
            _ => 1,
        }
    }

    pub fn output_len(&self) -> usize {
        self.multiplier() * self.signal_len()
    }

    pub fn kind(&self) -> TransformKind {
        match self {
            Transform::Framelet(sys) => TransformKind::Framelet {
                bank: sys.bank(),
                levels: sys.levels(),
            },
            Transform::Dct(_) => TransformKind::Dct,
            Transform::Identity { .. } => TransformKind::Identity,
        }
    }

    pub fn forward(&self, x: &Tensor3) -> Result<Tensor3> {
        self.check_len(x.n3(), self.signal_len())?;
        match self {
            Transform::Framelet(sys) => sys.analyze(x),
            Transform::Dct(d) => mode3_product(x, &d.matrix),
            Transform::Identity { .. } => Ok(x.clone()),
        }
    }

    pub fn adjoint(&self, y: &Tensor3) -> Result<Tensor3> {
        self.check_len(y.n3(), self.output_len())?;
        match self {
            Transform::Framelet(sys) => sys.synthesize(y),
            Transform::Dct(d) => mode3_product(y, &d.transpose),
            Transform::Identity { .. } => Ok(y.clone()),
        }
    }

    pub fn dense_matrix(&self) -> Matrix {
        match self {
            Transform::Framelet(sys) => sys.dense_matrix(),
            Transform::Dct(d) => d.matrix.clone(),
            Transform::Identity { n } => Matrix::identity(*n),
        }
    }

    fn check_len(&self, got: usize, want: usize) -> Result<()> {
        if got != want {
            return Err(Error::Shape(format!(
                "{} transform expects mode-3 extent {want}, got {got}",
                self.kind().label()
            )));
        }
        Ok(())
    }
}
