use std::time::Instant;

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::ledger::SfoLedger;

/// One recorded iteration. Optional metrics are `None` when undefined for the
/// solver or when diagnostics are off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub sfo: u64,
    pub po: u64,
    pub vnorm: Option<f64>,
    pub gradnorm: Option<f64>,
    pub loss: Option<f64>,
    pub gnorm_eta: Option<f64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceOptions {
    /// Record every `stride`-th iteration (and always the last one).
    pub stride: usize,
    /// Evaluate true gradient norm / loss / `G_eta` at recorded iterations,
    /// billed to the diagnostic counters.
    pub diagnostics: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            stride: 1,
            diagnostics: false,
        }
    }
}

/// Parameters a run actually used after defaults were resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub eta: f64,
    pub q: usize,
    pub batch: usize,
    pub anchor_batch: usize,
    pub max_iters: usize,
    /// beta_1 (smooth) or beta_2 (composite) for the resolved parameters.
    pub feasibility: f64,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub params: ResolvedParams,
    /// Ledger at the end of the run.
    pub ledger: SfoLedger,
    pub iterations: usize,
    /// Iteration index of the returned point.
    pub output_index: usize,
    /// True gradient norm (or `||G_eta||`) at the output, when computable.
    pub output_grad_norm: Option<f64>,
    /// `false` when a stopping rule was not met within the budget.
    pub converged: bool,
    /// Gradient-dominance mode: `||G_eta||` at each restart point, starting with
    /// the initial point. Empty for other solvers.
    #[serde(default)]
    pub epoch_stationarity: Vec<f64>,
}

impl RunTrace {
    /// Algorithm SFO at the first recorded iteration whose measured
    /// stationarity (`gnorm_eta`, else `gradnorm`) is at most `eps`.
    pub fn sfo_at_target(&self, eps: f64) -> Option<u64> {
        self.records
            .iter()
            .find(|r| r.gnorm_eta.or(r.gradnorm).is_some_and(|g| g <= eps))
            .map(|r| r.sfo)
    }
}

#[derive(Debug, Clone)]
pub struct SolverOutput {
    pub x_out: Array1<f64>,
    pub trace: RunTrace,
}

pub(crate) struct Recorder {
    opts: TraceOptions,
    start: Instant,
    pub(crate) records: Vec<TraceRecord>,
}

pub(crate) struct Metrics {
    pub gradnorm: Option<f64>,
    pub loss: Option<f64>,
    pub gnorm_eta: Option<f64>,
}

impl Recorder {
    pub(crate) fn new(opts: TraceOptions) -> Self {
        Self {
            opts,
            start: Instant::now(),
            records: Vec::new(),
        }
    }

    pub(crate) fn due(&self, k: usize, last: bool) -> bool {
        last || (self.opts.stride > 0 && k.is_multiple_of(self.opts.stride))
    }

    pub(crate) fn diagnostics(&self) -> bool {
        self.opts.diagnostics
    }

    pub(crate) fn push(&mut self, k: usize, ledger: &SfoLedger, vnorm: Option<f64>, m: Metrics) {
        self.records.push(TraceRecord {
            k,
            sfo: ledger.sfo(),
            po: ledger.prox_calls,
            vnorm,
            gradnorm: m.gradnorm,
            loss: m.loss,
            gnorm_eta: m.gnorm_eta,
            wall_ms: self.start.elapsed().as_secs_f64() * 1e3,
        });
    }
}

pub(crate) fn norm(v: &Array1<f64>) -> f64 {
    v.dot(v).sqrt()
}
