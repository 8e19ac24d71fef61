//! ADMM solvers for tensor completion and tensor robust PCA under the
//! transformed tensor nuclear norm, plus the norm itself.

mod completion;
mod rpca;

pub use completion::{complete, complete_with, Completion, CompletionState};
pub use rpca::{rpca, rpca_with, RpcaOutput, RpcaState};

use std::fmt::Write as _;
use std::time::Duration;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::framelet::FilterBank;
use crate::tensor::{nuclear_norm, svt, Matrix, Tensor3};
use crate::transform::{Transform, TransformKind};

/// ADMM hyperparameters. Solvers are deterministic given inputs and config.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    /// Augmented Lagrangian penalty β.
    pub beta: f64,
    /// Weight of the ℓ1 term; RPCA only. `None` selects [`default_rpca_lambda`].
    pub lambda: Option<f64>,
    /// Stopping tolerance ε on the ∞-norm of successive iterate differences.
    pub tol: f64,
    pub max_iter: usize,
    pub transform: TransformKind,
}

pub const DEFAULT_LEVELS: usize = 4;

impl SolverConfig {
    /// β = 1, (t_max, ε) = (100, 1e-2), cubic framelet with 4 levels.
    pub fn completion() -> Self {
        Self {
            beta: 1.0,
            lambda: None,
            tol: 1e-2,
            max_iter: 100,
            transform: TransformKind::Framelet {
                bank: FilterBank::Cubic,
                levels: DEFAULT_LEVELS,
            },
        }
    }

    /// β = 5, (t_max, ε) = (200, 1e-3), cubic framelet with 4 levels.
    pub fn rpca() -> Self {
        Self {
            beta: 5.0,
            tol: 1e-3,
            max_iter: 200,
            ..Self::completion()
        }
    }

    pub fn with_transform(mut self, transform: TransformKind) -> Self {
        self.transform = transform;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::Config(format!("lambda must be positive, got {l}")));
            }
        }
        Ok(())
    }
}

/// `3 / sqrt(max(n1, n2) · n3)`.
pub fn default_rpca_lambda(n1: usize, n2: usize, n3: usize) -> f64 {
    3.0 / ((n1.max(n2) * n3) as f64).sqrt()
}

/// One row of the convergence trace: ∞-norm differences between successive iterates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub delta_v: f64,
    /// `‖X^{t+1} − X^t‖_∞` for completion, `‖L^{t+1} − L^t‖_∞` for RPCA.
    pub delta_x: f64,
    pub delta_e: Option<f64>,
}

impl IterationRecord {
    pub fn max_delta(&self) -> f64 {
        self.delta_v.max(self.delta_x).max(self.delta_e.unwrap_or(0.0))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub trace: Vec<IterationRecord>,
    pub objective: f64,
    pub converged: bool,
    #[serde(serialize_with = "secs")]
    pub elapsed: Duration,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl SolveReport {
    /// Report equality ignoring wall time.
    pub fn same_run(&self, other: &SolveReport) -> bool {
        self.iterations == other.iterations
            && self.converged == other.converged
            && self.objective.to_bits() == other.objective.to_bits()
            && self.trace.len() == other.trace.len()
            && self.trace.iter().zip(&other.trace).all(|(a, b)| {
                a.iter == b.iter
                    && a.delta_v.to_bits() == b.delta_v.to_bits()
                    && a.delta_x.to_bits() == b.delta_x.to_bits()
                    && a.delta_e.map(f64::to_bits) == b.delta_e.map(f64::to_bits)
            })
    }
}

/// Serializes the per-iteration deltas as CSV with a header row.
pub fn objective_trace(report: &SolveReport) -> String {
    let with_e = report.trace.iter().any(|r| r.delta_e.is_some());
    let mut out = String::from(if with_e {
        "iter,delta_v,delta_x,delta_e\n"
    } else {
        "iter,delta_v,delta_x\n"
    });
    for r in &report.trace {
        let _ = write!(out, "{},{:e},{:e}", r.iter, r.delta_v, r.delta_x);
        if with_e {
            let _ = write!(out, ",{:e}", r.delta_e.unwrap_or(0.0));
        }
        out.push('\n');
    }
    out
}

/// Sum of nuclear norms of all transformed frontal slices.
pub fn ftnn(x: &Tensor3, t: &Transform) -> Result<f64> {
    let y = t.forward(x)?;
    slice_nuclear_norms(&y)
}

pub(crate) fn slice_nuclear_norms(y: &Tensor3) -> Result<f64> {
    let (n1, n2) = (y.n1(), y.n2());
    let norms = y
        .as_slice()
        .par_chunks_exact(y.slice_len())
        .map(|s| nuclear_norm(&Matrix::from_col_major(n1, n2, s.to_vec())?))
        .collect::<Result<Vec<f64>>>()?;
    // fixed summation order
    Ok(norms.iter().sum())
}

/// Applies SVT with threshold `tau` to every frontal slice of `a`.
pub fn svt_slices(a: &Tensor3, tau: f64) -> Result<Tensor3> {
    let (n1, n2, n3) = a.dims();
    let mut out = Tensor3::zeros(n1, n2, n3);
    out.as_mut_slice()
        .par_chunks_exact_mut(n1 * n2)
        .zip(a.as_slice().par_chunks_exact(n1 * n2))
        .try_for_each(|(dst, src)| -> Result<()> {
            let m = Matrix::from_col_major(n1, n2, src.to_vec())?;
            dst.copy_from_slice(svt(&m, tau)?.as_slice());
            Ok(())
        })?;
    Ok(out)
}
