use std::time::Instant;

use super::{
    default_rpca_lambda, slice_nuclear_norms, svt_slices, IterationRecord, SolveReport,
    SolverConfig,
};
use crate::error::{Error, Result};
use crate::tensor::{soft_threshold_scalar, Tensor3};

#[derive(Clone, Debug)]
pub struct RpcaOutput {
    pub low_rank: Tensor3,
    pub sparse: Tensor3,
    pub report: SolveReport,
}

pub struct RpcaState<'a> {
    pub iter: usize,
    pub low_rank: &'a Tensor3,
    pub sparse: &'a Tensor3,
    pub v: &'a Tensor3,
}

/// Splits `o` into a low transformed-rank part and a sparse part by
/// minimizing `‖L‖_TNN + λ‖E‖₁` subject to `O = L + E`.
pub fn rpca(o: &Tensor3, cfg: &SolverConfig) -> Result<RpcaOutput> {
    rpca_with(o, cfg, |_| {})
}

/// [`rpca`], calling `observer` after every iteration.
///
/// The low-rank iterate starts at `O` (so `V⁰ = O_W`), `E⁰ = 0` and both
/// multipliers at zero. Per iteration:
/// `V = SVT_{1/β}(L_W + Λ₁/β)`,
/// `L = ½ Wᵀ(V − Λ₁/β) + ½ (O − E + Λ₂/β)`,
/// `E = Soft_{λ/β}(O − L + Λ₂/β)`,
/// `Λ₁ += β (L_W − V)`, `Λ₂ += β (O − L − E)`.
pub fn rpca_with(
    o: &Tensor3,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&RpcaState<'_>),
) -> Result<RpcaOutput> {
    cfg.validate()?;
    if !o.is_finite() {
        return Err(Error::Numeric("observation has non-finite entries".into()));
    }
    let (n1, n2, n3) = o.dims();
    let lam = cfg.lambda.unwrap_or_else(|| default_rpca_lambda(n1, n2, n3));
    let transform = cfg.transform.build(n3)?;
    let start = Instant::now();
    let beta = cfg.beta;
    let inv_beta = 1.0 / beta;

    let mut low = o.clone();
    let mut lw = transform.forward(&low)?;
    let mut v = lw.clone();
    let mut sparse = Tensor3::zeros(n1, n2, n3);
    let mut mult1 = Tensor3::zeros(lw.n1(), lw.n2(), lw.n3());
    let mut mult2 = Tensor3::zeros(n1, n2, n3);

    let mut trace = Vec::new();
    let mut converged = false;
    for t in 1..=cfg.max_iter {
        let mut arg = lw.clone();
        arg.axpy(inv_beta, &mult1)?;
        let v_next = svt_slices(&arg, inv_beta)?;

        let mut back = v_next.clone();
        back.axpy(-inv_beta, &mult1)?;
        let synth = transform.adjoint(&back)?;
        let mut low_next = Tensor3::zeros(n1, n2, n3);
        for (idx, l) in low_next.as_mut_slice().iter_mut().enumerate() {
            let fit = o.as_slice()[idx] - sparse.as_slice()[idx] + inv_beta * mult2.as_slice()[idx];
            *l = 0.5 * synth.as_slice()[idx] + 0.5 * fit;
        }

        let tau = lam * inv_beta;
        let mut sparse_next = Tensor3::zeros(n1, n2, n3);
        for (idx, e) in sparse_next.as_mut_slice().iter_mut().enumerate() {
            let r = o.as_slice()[idx] - low_next.as_slice()[idx] + inv_beta * mult2.as_slice()[idx];
            *e = soft_threshold_scalar(r, tau);
        }

        lw = transform.forward(&low_next)?;
        let mut residual = lw.clone();
        residual.axpy(-1.0, &v_next)?;
        mult1.axpy(beta, &residual)?;
        for (idx, m) in mult2.as_mut_slice().iter_mut().enumerate() {
            *m += beta
                * (o.as_slice()[idx] - low_next.as_slice()[idx] - sparse_next.as_slice()[idx]);
        }

        let rec = IterationRecord {
            iter: t,
            delta_v: v_next.max_abs_diff(&v),
            delta_x: low_next.max_abs_diff(&low),
            delta_e: Some(sparse_next.max_abs_diff(&sparse)),
        };
        trace.push(rec);
        v = v_next;
        low = low_next;
        sparse = sparse_next;
        if !low.is_finite() || !sparse.is_finite() {
            return Err(Error::Numeric(format!("iterate became non-finite at iteration {t}")));
        }
        observer(&RpcaState {
            iter: t,
            low_rank: &low,
            sparse: &sparse,
            v: &v,
        });
        if rec.max_delta() <= cfg.tol {
            converged = true;
            break;
        }
    }

    let objective = slice_nuclear_norms(&lw)? + lam * sparse.norms().l1;
    Ok(RpcaOutput {
        low_rank: low,
        sparse,
        report: SolveReport {
            iterations: trace.len(),
            trace,
            objective,
            converged,
            elapsed: start.elapsed(),
        },
    })
}
