//! Command-line surface. Every command prints a one-line JSON summary on
//! standard output and writes its artifacts atomically.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::analysis::{multi_rank_spectrum, BIN_LABELS};
use crate::error::{Error, Result};
use crate::framelet::{FilterBank, FrameletSystem};
use crate::io::{self, checksum, encode_mask, encode_tensor, write_atomic};
use crate::metrics::quality_report;
use crate::solvers::{self, objective_trace, SolverConfig};
use crate::synth::{self, Rescale};
use crate::tensor::Tensor3;
use crate::transform::{TransformFamily, TransformKind};

/// Environment variable holding the worker-thread count.
pub const THREADS_ENV: &str = "FTNN_THREADS";

#[derive(Debug, Parser)]
#[command(name = "ftnn", version, about = "Framelet tensor nuclear norm completion and robust PCA")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic tensors, masks and corruptions.
    Gen(GenArgs),
    /// Tensor completion from observed entries.
    Complete(CompleteArgs),
    /// Low-rank plus sparse decomposition.
    Rpca(RpcaArgs),
    /// Truncated multi-rank and singular value histograms under several transforms.
    AnalyzeRank(AnalyzeRankArgs),
    /// Per-slice PSNR and SSIM.
    Metrics(MetricsArgs),
    /// Apply or export the framelet transform.
    Transform(TransformArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GenKind {
    Lowrank,
    Smooth,
    Piecewise,
    Mask,
    Saltpepper,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub kind: GenKind,
    /// Extents as N1xN2xN3 (not used by saltpepper, which reads --in).
    #[arg(long, value_parser = parse_dims)]
    pub dims: Option<(usize, usize, usize)>,
    #[arg(long, default_value_t = 2)]
    pub rank: usize,
    /// Basis functions per tube (smooth) or segments per tube (piecewise).
    #[arg(long, default_value_t = 3)]
    pub bandwidth: usize,
    #[arg(long)]
    pub sr: Option<f64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Clean tensor to corrupt (saltpepper).
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Where to write the corrupted offsets (saltpepper).
    #[arg(long)]
    pub mask_out: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TransformOpts {
    #[arg(long, default_value = "framelet")]
    pub transform: String,
    #[arg(long, default_value = "cubic")]
    pub filter: String,
    #[arg(long, default_value_t = solvers::DEFAULT_LEVELS)]
    pub levels: usize,
}

impl TransformOpts {
    fn kind(&self) -> Result<TransformKind> {
        let family: TransformFamily = self.transform.parse()?;
        let bank: FilterBank = self.filter.parse()?;
        Ok(family.with_framelet(bank, self.levels))
    }
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    #[command(flatten)]
    pub transform: TransformOpts,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Ground truth; adds the relative recovery error to the summary.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RpcaArgs {
    #[arg(long)]
    pub obs: PathBuf,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    #[command(flatten)]
    pub transform: TransformOpts,
    /// Solve on the cyclically shifted tensor (n1,n2,n3) -> (n2,n3,n1).
    #[arg(long)]
    pub shiftdim: bool,
    #[arg(long)]
    pub out_l: PathBuf,
    #[arg(long)]
    pub out_e: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeRankArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "identity,dct,framelet")]
    pub transform: Vec<String>,
    #[arg(long, default_value = "cubic")]
    pub filter: String,
    #[arg(long, default_value_t = solvers::DEFAULT_LEVELS)]
    pub levels: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.02,0.01,0.005")]
    pub eps: Vec<f64>,
    /// Mean-rank CSV; histograms go next to it as `<stem>_hist_<transform>.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long = "ref")]
    pub reference: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub peak: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TransformAction {
    Analyze,
    Synthesize,
    DumpW,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[arg(value_enum)]
    pub action: TransformAction,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Signal length for dump-w.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = "cubic")]
    pub filter: String,
    #[arg(long, default_value_t = solvers::DEFAULT_LEVELS)]
    pub levels: usize,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn parse_dims(s: &str) -> std::result::Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(['x', 'X']).collect();
    let bad = || format!("expected N1xN2xN3, got '{s}'");
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<usize> = parts
        .iter()
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<std::result::Result<_, _>>()?;
    if v.contains(&0) {
        return Err(bad());
    }
    Ok((v[0], v[1], v[2]))
}

/// Process exit code for an error: 2 usage/configuration, 3 numeric, 4 I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Shape(_) => 2,
        Error::Numeric(_) => 3,
        Error::Io(_) | Error::Format(_) => 4,
    }
}

/// Runs a parsed command and returns its JSON summary.
pub fn run(cli: Cli) -> Result<Value> {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a),
        Command::Complete(a) => cmd_complete(&a),
        Command::Rpca(a) => cmd_rpca(&a),
        Command::AnalyzeRank(a) => cmd_analyze_rank(&a),
        Command::Metrics(a) => cmd_metrics(&a),
        Command::Transform(a) => cmd_transform(&a),
    }
}

fn require<T: Copy>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing required flag --{flag}")))
}

fn dims_json(d: (usize, usize, usize)) -> Value {
    json!([d.0, d.1, d.2])
}

pub fn cmd_gen(a: &GenArgs) -> Result<Value> {
    let kind = format!("{:?}", a.kind).to_lowercase();
    let (bytes, dims, extra) = match a.kind {
        GenKind::Saltpepper => {
            let input = a
                .input
                .as_ref()
                .ok_or_else(|| Error::Config("missing required flag --in".into()))?;
            let x = io::read_tensor(input)?;
            let (y, corrupted) = synth::add_salt_pepper(&x, require(a.rho, "rho")?, a.seed)?;
            if let Some(p) = &a.mask_out {
                io::write_mask(p, &corrupted)?;
            }
            (encode_tensor(&y), y.dims(), json!({ "corrupted": corrupted.len() }))
        }
        GenKind::Mask => {
            let (n1, n2, n3) = require(a.dims, "dims")?;
            let m = synth::gen_mask(n1, n2, n3, require(a.sr, "sr")?, a.seed)?;
            (encode_mask(&m), m.dims(), json!({ "count": m.len() }))
        }
        GenKind::Lowrank | GenKind::Smooth | GenKind::Piecewise => {
            let (n1, n2, n3) = require(a.dims, "dims")?;
            let x = match a.kind {
                GenKind::Lowrank => synth::gen_tubal_lowrank(n1, n2, n3, a.rank, a.seed)?.tensor,
                GenKind::Smooth => synth::gen_smooth(n1, n2, n3, a.bandwidth, a.seed)?,
                _ => synth::gen_piecewise_smooth(n1, n2, n3, a.bandwidth, a.seed)?,
            };
            (encode_tensor(&x), x.dims(), json!({}))
        }
    };
    write_atomic(&a.out, &bytes)?;
    let mut summary = json!({
        "command": "gen",
        "kind": kind,
        "dims": dims_json(dims),
        "seed": a.seed,
        "checksum": checksum(&bytes),
        "out": a.out.display().to_string(),
    });
    merge(&mut summary, extra);
    Ok(summary)
}

fn merge(into: &mut Value, extra: Value) {
    if let (Some(dst), Value::Object(src)) = (into.as_object_mut(), extra) {
        dst.extend(src);
    }
}

fn relative_error(estimate: &Tensor3, truth: &Tensor3) -> Result<f64> {
    let diff = estimate.sub(truth)?;
    Ok(diff.fro_norm() / truth.fro_norm().max(f64::MIN_POSITIVE))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    write_atomic(path, text.as_bytes())
}

pub fn cmd_complete(a: &CompleteArgs) -> Result<Value> {
    let obs = io::read_tensor(&a.obs)?;
    let mask = io::read_mask(&a.mask)?;
    if obs.dims() != mask.dims() {
        return Err(Error::Shape(format!(
            "observation {:?} vs mask {:?}",
            obs.dims(),
            mask.dims()
        )));
    }
    let cfg = SolverConfig::completion()
        .with_transform(a.transform.kind()?)
        .with_beta(a.beta)
        .with_tol(a.tol)
        .with_max_iter(a.max_iter);

    // affine normalization from the observed entries only
    let (lo, hi) = mask
        .indices()
        .iter()
        .map(|&i| obs.as_slice()[i])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    let (lo, span) = if lo.is_finite() && hi > lo { (lo, hi - lo) } else { (0.0, 1.0) };
    let normalized = obs.map(|v| (v - lo) / span);

    let result = solvers::complete(&normalized, &mask, &cfg)?;
    let mut x = result.x.map(|v| lo + span * v);
    for &i in mask.indices() {
        x.as_mut_slice()[i] = obs.as_slice()[i];
    }
    io::write_tensor(&a.out, &x)?;
    if let Some(p) = &a.trace {
        write_text(p, &objective_trace(&result.report))?;
    }
    let mut summary = json!({
        "command": "complete",
        "dims": dims_json(x.dims()),
        "transform": cfg.transform.label(),
        "beta": cfg.beta,
        "tol": cfg.tol,
        "max_iter": cfg.max_iter,
        "sampling_rate": mask.sampling_rate(),
        "iterations": result.report.iterations,
        "converged": result.report.converged,
        "objective": result.report.objective,
        "elapsed_s": result.report.elapsed.as_secs_f64(),
        "checksum": checksum(&encode_tensor(&x)),
    });
    if let Some(t) = &a.truth {
        let truth = io::read_tensor(t)?;
        merge(&mut summary, json!({ "relative_error": relative_error(&x, &truth)? }));
    }
    Ok(summary)
}

pub fn cmd_rpca(a: &RpcaArgs) -> Result<Value> {
    let obs = io::read_tensor(&a.obs)?;
    let view = if a.shiftdim { obs.shift_dims() } else { obs.clone() };
    let (n1, n2, n3) = view.dims();
    let lambda = a
        .lambda
        .unwrap_or_else(|| solvers::default_rpca_lambda(n1, n2, n3));
    let cfg = SolverConfig::rpca()
        .with_transform(a.transform.kind()?)
        .with_beta(a.beta)
        .with_tol(a.tol)
        .with_max_iter(a.max_iter)
        .with_lambda(lambda);

    let (lo, hi) = view.min_max();
    let (lo, span) = if hi > lo { (lo, hi - lo) } else { (0.0, 1.0) };
    let normalized = view.map(|v| (v - lo) / span);
    let out = solvers::rpca(&normalized, &cfg)?;
    let mut low = out.low_rank.map(|v| lo + span * v);
    let mut sparse = out.sparse.map(|v| span * v);
    if a.shiftdim {
        low = low.unshift_dims();
        sparse = sparse.unshift_dims();
    }
    io::write_tensor(&a.out_l, &low)?;
    io::write_tensor(&a.out_e, &sparse)?;
    if let Some(p) = &a.trace {
        write_text(p, &objective_trace(&out.report))?;
    }
    let residual = obs.sub(&low)?.sub(&sparse)?.max_abs();
    let mut summary = json!({
        "command": "rpca",
        "dims": dims_json(obs.dims()),
        "solver_dims": dims_json((n1, n2, n3)),
        "transform": cfg.transform.label(),
        "beta": cfg.beta,
        "lambda": lambda,
        "tol": cfg.tol,
        "max_iter": cfg.max_iter,
        "iterations": out.report.iterations,
        "converged": out.report.converged,
        "objective": out.report.objective,
        "residual_inf": residual,
        "elapsed_s": out.report.elapsed.as_secs_f64(),
        "checksum_l": checksum(&encode_tensor(&low)),
        "checksum_e": checksum(&encode_tensor(&sparse)),
    });
    if let Some(t) = &a.truth {
        let truth = io::read_tensor(t)?;
        merge(&mut summary, json!({ "relative_error": relative_error(&low, &truth)? }));
    }
    Ok(summary)
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "ranks".into());
    path.with_file_name(format!("{stem}_{suffix}.csv"))
}

pub fn cmd_analyze_rank(a: &AnalyzeRankArgs) -> Result<Value> {
    if a.eps.is_empty() || a.eps.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::Config("--eps must list positive values".into()));
    }
    let bank: FilterBank = a.filter.parse()?;
    let families = a
        .transform
        .iter()
        .map(|s| s.parse::<TransformFamily>())
        .collect::<Result<Vec<_>>>()?;
    let x = io::read_tensor(&a.input)?;
    let x = Rescale::to_unit(&x).apply(&x);

    let mut ranks_csv = String::from("transform,epsilon,mean_rank\n");
    let mut rows = Vec::new();
    let mut hist_files = Vec::new();
    for family in families {
        let kind = family.with_framelet(bank, a.levels);
        let t = kind.build(x.n3())?;
        let spectra = multi_rank_spectrum(&x, &t, &a.eps)?;
        for s in &spectra {
            ranks_csv.push_str(&format!("{},{},{:.6}\n", kind.label(), s.epsilon, s.mean_rank));
            rows.push(json!({ "transform": kind.label(), "epsilon": s.epsilon, "mean_rank": s.mean_rank }));
        }
        let hist = spectra[0].histogram;
        let mut hist_csv = String::from("bin,count,fraction\n");
        for (label, (c, f)) in BIN_LABELS.iter().zip(hist.counts.iter().zip(&hist.fractions)) {
            hist_csv.push_str(&format!("{label},{c},{f:.6}\n"));
        }
        let hist_path = sibling(&a.out, &format!("hist_{family}"));
        write_text(&hist_path, &hist_csv)?;
        hist_files.push(hist_path.display().to_string());
    }
    write_text(&a.out, &ranks_csv)?;
    Ok(json!({
        "command": "analyze-rank",
        "dims": dims_json(x.dims()),
        "results": rows,
        "histograms": hist_files,
    }))
}

pub fn cmd_metrics(a: &MetricsArgs) -> Result<Value> {
    let reference = io::read_tensor(&a.reference)?;
    let test = io::read_tensor(&a.test)?;
    let report = quality_report(&reference, &test, a.peak)?;
    write_text(&a.out, &report.to_csv())?;
    Ok(json!({
        "command": "metrics",
        "dims": dims_json(reference.dims()),
        "mean_psnr": report.mean_psnr,
        "mean_ssim": report.mean_ssim,
    }))
}

pub fn cmd_transform(a: &TransformArgs) -> Result<Value> {
    let bank: FilterBank = a.filter.parse()?;
    match a.action {
        TransformAction::DumpW => {
            let n = require(a.n, "n")?;
            let sys = FrameletSystem::new(bank, a.levels, n)?;
            let w = sys.dense_matrix();
            let mut csv = (1..=w.cols())
                .map(|j| format!("col_{j}"))
                .collect::<Vec<_>>()
                .join(",");
            csv.push('\n');
            for i in 0..w.rows() {
                let row: Vec<String> = (0..w.cols()).map(|j| format!("{:e}", w[(i, j)])).collect();
                csv.push_str(&row.join(","));
                csv.push('\n');
            }
            write_text(&a.out, &csv)?;
            Ok(json!({
                "command": "transform",
                "action": "dump-w",
                "rows": w.rows(),
                "cols": w.cols(),
                "bands": sys.band_count(),
            }))
        }
        TransformAction::Analyze | TransformAction::Synthesize => {
            let input = a
                .input
                .as_ref()
                .ok_or_else(|| Error::Config("missing required flag --in".into()))?;
            let x = io::read_tensor(input)?;
            let y = if matches!(a.action, TransformAction::Analyze) {
                FrameletSystem::new(bank, a.levels, x.n3())?.analyze(&x)?
            } else {
                let w = (bank.filter_count() - 1) * a.levels + 1;
                if x.n3() % w != 0 {
                    return Err(Error::Shape(format!(
                        "n3 = {} is not a multiple of the band count {w}",
                        x.n3()
                    )));
                }
                FrameletSystem::new(bank, a.levels, x.n3() / w)?.synthesize(&x)?
            };
            let bytes = encode_tensor(&y);
            write_atomic(&a.out, &bytes)?;
            Ok(json!({
                "command": "transform",
                "action": format!("{:?}", a.action).to_lowercase(),
                "dims": dims_json(y.dims()),
                "checksum": checksum(&bytes),
            }))
        }
    }
}
