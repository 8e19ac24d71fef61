use std::time::Instant;

use super::{slice_nuclear_norms, svt_slices, IterationRecord, SolveReport, SolverConfig};
use crate::error::{Error, Result};
use crate::tensor::{project_mask, Mask, Tensor3};

#[derive(Clone, Debug)]
pub struct Completion {
    pub x: Tensor3,
    pub report: SolveReport,
}

/// Solver state after an iteration, handed to observers.
pub struct CompletionState<'a> {
    pub iter: usize,
    pub x: &'a Tensor3,
    pub v: &'a Tensor3,
    pub multiplier: &'a Tensor3,
}

/// Recovers `o` from its entries on `mask` by minimizing the transformed
/// tensor nuclear norm subject to agreement on the mask.
pub fn complete(o: &Tensor3, mask: &Mask, cfg: &SolverConfig) -> Result<Completion> {
    complete_with(o, mask, cfg, |_| {})
}

/// [`complete`], calling `observer` after every iteration.
///
/// Entries of `o` off the mask are ignored. Per iteration:
/// `V = SVT_{1/β}(X_W + Λ/β)` slice-wise,
/// `X = P_{Ωᶜ}(Wᵀ(V − Λ/β)) + P_Ω(O)`,
/// `Λ += β (X_W − V)`.
pub fn complete_with(
    o: &Tensor3,
    mask: &Mask,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&CompletionState<'_>),
) -> Result<Completion> {
    cfg.validate()?;
    if o.dims() != mask.dims() {
        return Err(Error::Shape(format!(
            "observation {:?} vs mask {:?}",
            o.dims(),
            mask.dims()
        )));
    }
    if mask.indices().iter().any(|&i| !o.as_slice()[i].is_finite()) {
        return Err(Error::Numeric("observation has non-finite entries on the mask".into()));
    }
    let transform = cfg.transform.build(o.n3())?;
    let start = Instant::now();
    let beta = cfg.beta;

    let observed = project_mask(o, mask)?;
    let mut x = observed.clone();
    let mut xw = transform.forward(&x)?;
    let mut v = xw.clone();
    let mut lambda = Tensor3::zeros(xw.n1(), xw.n2(), xw.n3());

    let mut trace = Vec::new();
    let mut converged = false;
    for t in 1..=cfg.max_iter {
        let mut arg = xw.clone();
        arg.axpy(1.0 / beta, &lambda)?;
        let v_next = svt_slices(&arg, 1.0 / beta)?;

        let mut back = v_next.clone();
        back.axpy(-1.0 / beta, &lambda)?;
        let mut x_next = transform.adjoint(&back)?;
        for &i in mask.indices() {
            x_next.as_mut_slice()[i] = o.as_slice()[i];
        }

        xw = transform.forward(&x_next)?;
        let mut residual = xw.clone();
        residual.axpy(-1.0, &v_next)?;
        lambda.axpy(beta, &residual)?;

        let rec = IterationRecord {
            iter: t,
            delta_v: v_next.max_abs_diff(&v),
            delta_x: x_next.max_abs_diff(&x),
            delta_e: None,
        };
        trace.push(rec);
        v = v_next;
        x = x_next;
        if !x.is_finite() {
            return Err(Error::Numeric(format!("iterate became non-finite at iteration {t}")));
        }
        observer(&CompletionState {
            iter: t,
            x: &x,
            v: &v,
            multiplier: &lambda,
        });
        if rec.delta_v <= cfg.tol && rec.delta_x <= cfg.tol {
            converged = true;
            break;
        }
    }

    let objective = slice_nuclear_norms(&xw)?;
    Ok(Completion {
        x,
        report: SolveReport {
            iterations: trace.len(),
            trace,
            objective,
            converged,
            elapsed: start.elapsed(),
        },
    })
}
