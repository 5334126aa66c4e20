//! Runs every (solver, seed) cell of an experiment and writes its artifacts.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::Array1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use spider_vr::bregman::BregmanGeometry;
use spider_vr::composite::{
    run_prox_spiderboost, run_prox_spiderboost_gd, run_prox_spiderboost_o, CompositeSolverConfig,
};
use spider_vr::gaussian_start;
use spider_vr::ledger::SfoLedger;
use spider_vr::prox::Regularizer;
use spider_vr::smooth::{run_sarah, run_spider, run_spiderboost, SmoothSolverConfig};
use spider_vr::trace::{ResolvedParams, SolverOutput, TraceOptions, TraceRecord};

use crate::config::{
    Algorithm, ExperimentConfig, GeometrySpec, RegularizerSpec, SolverSpec, StartSpec,
};
use crate::error::BenchError;
use crate::problems::Instance;

/// Overrides the configured output directory.
pub const OUTPUT_ENV: &str = "SPIDER_BENCH_OUT";

pub const TRACE_HEADER: [&str; 8] = [
    "k",
    "sfo",
    "po",
    "vnorm",
    "gradnorm",
    "loss",
    "gnorm_eta",
    "wall_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellStatus {
    Ok,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub solver: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub status: CellStatus,
    pub error: Option<String>,
    /// Trace file name, relative to the summary's directory.
    pub trace_file: Option<String>,
    pub eps: f64,
    pub iterations: Option<usize>,
    pub output_index: Option<usize>,
    pub converged: Option<bool>,
    /// True gradient norm (`||G_eta||` for composite solvers) at the output.
    pub output_stationarity: Option<f64>,
    pub final_loss: Option<f64>,
    pub sfo_at_target: Option<u64>,
    pub epochs_at_target: Option<f64>,
    /// Per-index billing: two gradients per sampled index of an inner step.
    pub sfo_per_index: Option<u64>,
    /// Epoch convention: `|S1|` per anchor plus `|S2|` per iteration.
    pub sfo_epoch_convention: Option<u64>,
    pub po: Option<u64>,
    pub ledger: Option<SfoLedger>,
    pub params: Option<ResolvedParams>,
    #[serde(default)]
    pub epoch_stationarity: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub eps: f64,
    /// Oracle calls per data pass; `epochs = sfo / epoch_size`.
    pub epoch_size: Option<usize>,
    pub config: ExperimentConfig,
    pub cells: Vec<CellSummary>,
}

impl ExperimentSummary {
    pub fn aborted(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.status == CellStatus::Aborted)
            .count()
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| BenchError::Json {
            path: path.display().to_string(),
            source,
        })
    }
}

/// `<root>/<name>`, where root is `$SPIDER_BENCH_OUT` if set, else the
/// configured `output_dir`.
pub fn output_dir(cfg: &ExperimentConfig) -> PathBuf {
    let root = std::env::var_os(OUTPUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| cfg.output_dir.clone());
    root.join(&cfg.name)
}

pub fn trace_file_name(solver: &str, seed: u64) -> String {
    format!("{solver}_seed{seed}.csv")
}

fn start_point(spec: &StartSpec, dim: usize) -> Result<Option<Array1<f64>>, BenchError> {
    Ok(match spec {
        StartSpec::Default => None,
        StartSpec::Gaussian { scale, seed } => Some(gaussian_start(dim, *scale, *seed)),
        StartSpec::Point { x } => {
            if x.len() != dim {
                return Err(BenchError::Config(vec![format!(
                    "start.x has length {}, problem dimension is {dim}",
                    x.len()
                )]));
            }
            Some(Array1::from(x.clone()))
        }
    })
}

fn regularizer(spec: RegularizerSpec) -> spider_vr::Result<Regularizer> {
    match spec {
        RegularizerSpec::Zero => Ok(Regularizer::Zero),
        RegularizerSpec::L1 { lambda } => Regularizer::l1(lambda),
        RegularizerSpec::Box { lo, hi } => Regularizer::boxed(lo, hi),
    }
}

fn geometry(spec: GeometrySpec) -> spider_vr::Result<BregmanGeometry> {
    match spec {
        GeometrySpec::Euclidean => Ok(BregmanGeometry::euclidean()),
        GeometrySpec::EntropySimplex { alpha } => {
            BregmanGeometry::entropy_simplex().with_alpha(alpha)
        }
    }
}

/// Runs one cell.
pub fn run_cell(
    instance: &Instance,
    spec: &SolverSpec,
    eps: f64,
    seed: u64,
    x0: Option<Array1<f64>>,
    trace: TraceOptions,
) -> spider_vr::Result<SolverOutput> {
    if spec.algorithm.is_composite() {
        let mut c = CompositeSolverConfig::new(eps, seed);
        c.eta = spec.eta;
        c.q = spec.q;
        c.s1 = spec.s1;
        c.s2 = spec.batch;
        c.max_iters = spec.max_iters;
        c.sigma_sq = spec.sigma_sq;
        c.geometry = geometry(spec.geometry)?;
        c.reg = regularizer(spec.regularizer)?;
        c.tau = spec.tau;
        if let Some(v) = spec.epoch_constant {
            c.epoch_constant = v;
        }
        if let Some(v) = spec.max_epochs {
            c.max_epochs = v;
        }
        if let Some(v) = spec.stop_at_target {
            c.stop_at_target = v;
        }
        c.sampling = spec.sampling;
        c.x0 = x0;
        c.trace = trace;
        match spec.algorithm {
            Algorithm::ProxSpiderboost => run_prox_spiderboost(need_finite(instance)?, &c),
            Algorithm::ProxSpiderboostGd => run_prox_spiderboost_gd(need_finite(instance)?, &c),
            _ => run_prox_spiderboost_o(need_online(instance)?, &c),
        }
    } else {
        let mut c = SmoothSolverConfig::new(eps, seed);
        c.eta = spec.eta;
        c.q = spec.q;
        c.batch = spec.batch;
        c.max_iters = spec.max_iters;
        c.output_rule = spec.output_rule;
        c.sampling = spec.sampling;
        if let Some(v) = spec.stop_at_target {
            c.stop_at_target = v;
        }
        c.x0 = x0;
        c.trace = trace;
        let p = need_finite(instance)?;
        match spec.algorithm {
            Algorithm::Sarah => run_sarah(p, &c),
            Algorithm::Spider => run_spider(p, &c),
            _ => run_spiderboost(p, &c),
        }
    }
}

fn need_finite(instance: &Instance) -> spider_vr::Result<&dyn spider_vr::FiniteSum> {
    instance.finite_sum().ok_or_else(|| {
        spider_vr::Error::Unsupported("finite-sum solver on an online problem".into())
    })
}

fn need_online(instance: &Instance) -> spider_vr::Result<&dyn spider_vr::OnlineOracle> {
    instance.online().ok_or_else(|| {
        spider_vr::Error::Unsupported("online solver on a finite-sum problem".into())
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Trace CSV bytes. Floats use the shortest round-trip representation, so
/// identical runs give identical bytes apart from `wall_ms`.
pub fn trace_csv(records: &[TraceRecord]) -> Result<Vec<u8>, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TRACE_HEADER)?;
    for r in records {
        w.write_record([
            r.k.to_string(),
            r.sfo.to_string(),
            r.po.to_string(),
            fmt_opt(r.vnorm),
            fmt_opt(r.gradnorm),
            fmt_opt(r.loss),
            fmt_opt(r.gnorm_eta),
            r.wall_ms.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| csv::Error::from(e.into_error()))
}

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), BenchError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| BenchError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| BenchError::io(path, e))?;
    tmp.persist(path)
        .map_err(|e| BenchError::io(path, e.error))?;
    Ok(())
}

fn summarize(
    spec: &SolverSpec,
    seed: u64,
    eps: f64,
    epoch_size: Option<usize>,
    out: &SolverOutput,
    trace_file: String,
) -> CellSummary {
    let t = &out.trace;
    let sfo_at_target = t.sfo_at_target(eps);
    CellSummary {
        solver: spec.label().to_string(),
        algorithm: spec.algorithm,
        seed,
        status: CellStatus::Ok,
        error: None,
        trace_file: Some(trace_file),
        eps,
        iterations: Some(t.iterations),
        output_index: Some(t.output_index),
        converged: Some(t.converged),
        output_stationarity: t.output_grad_norm,
        final_loss: t.records.last().and_then(|r| r.loss),
        sfo_at_target,
        epochs_at_target: sfo_at_target
            .zip(epoch_size)
            .map(|(s, n)| s as f64 / n as f64),
        sfo_per_index: Some(t.ledger.sfo()),
        sfo_epoch_convention: Some(t.ledger.epoch_convention_evals),
        po: Some(t.ledger.prox_calls),
        ledger: Some(t.ledger),
        params: Some(t.params.clone()),
        epoch_stationarity: t.epoch_stationarity.clone(),
    }
}

fn aborted(spec: &SolverSpec, seed: u64, eps: f64, message: String) -> CellSummary {
    CellSummary {
        solver: spec.label().to_string(),
        algorithm: spec.algorithm,
        seed,
        status: CellStatus::Aborted,
        error: Some(message),
        trace_file: None,
        eps,
        iterations: None,
        output_index: None,
        converged: None,
        output_stationarity: None,
        final_loss: None,
        sfo_at_target: None,
        epochs_at_target: None,
        sfo_per_index: None,
        sfo_epoch_convention: None,
        po: None,
        ledger: None,
        params: None,
        epoch_stationarity: Vec::new(),
    }
}

/// Runs the experiment into `dir` (see [`output_dir`]). Cells run in
/// parallel; a solver error aborts only its own cell and is recorded in the
/// summary.
pub fn run_experiment_in(
    cfg: &ExperimentConfig,
    dir: &Path,
) -> Result<ExperimentSummary, BenchError> {
    cfg.validate()?;
    let instance = Instance::build(&cfg.problem)
        .map_err(|e| BenchError::Config(vec![format!("problem: {e}")]))?;
    let x0 = start_point(&cfg.start, instance.dim())?;
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    let trace = TraceOptions {
        stride: cfg.trace_stride,
        diagnostics: cfg.diagnostics,
    };
    let epoch_size = instance.epoch_size();

    let jobs: Vec<(&SolverSpec, u64)> = cfg
        .solvers
        .iter()
        .flat_map(|s| cfg.seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(spec, seed)| {
            let eps = spec.eps.unwrap_or(cfg.eps);
            match run_cell(&instance, spec, eps, seed, x0.clone(), trace) {
                Ok(out) => {
                    let name = trace_file_name(spec.label(), seed);
                    let path = dir.join(&name);
                    let bytes =
                        trace_csv(&out.trace.records).map_err(|source| BenchError::Csv {
                            path: path.display().to_string(),
                            source,
                        })?;
                    write_atomic(&path, &bytes)?;
                    Ok(summarize(spec, seed, eps, epoch_size, &out, name))
                }
                Err(e) => Ok(aborted(spec, seed, eps, e.to_string())),
            }
        })
        .collect::<Result<Vec<_>, BenchError>>()?;

    let summary = ExperimentSummary {
        name: cfg.name.clone(),
        eps: cfg.eps,
        epoch_size,
        config: cfg.clone(),
        cells,
    };
    let path = dir.join("summary.json");
    let json = serde_json::to_vec_pretty(&summary).map_err(|source| BenchError::Json {
        path: path.display().to_string(),
        source,
    })?;
    write_atomic(&path, &json)?;
    Ok(summary)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary, BenchError> {
    run_experiment_in(cfg, &output_dir(cfg))
}
