//! SARAH, SPIDER and SpiderBoost for smooth finite sums.

use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::estimator::{SamplingMode, SpiderEstimator};
use crate::ledger::SfoLedger;
use crate::params::{beta1, ceil_sqrt, finite_sum_iterations};
use crate::problem::{diagnostic_gradient, full_gradient, FiniteSum};
use crate::trace::{norm, Metrics, Recorder, ResolvedParams, RunTrace, SolverOutput, TraceOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputRule {
    /// `x_xi` with `xi` uniform on `{0, ..., K-1}`.
    RandomIterate,
    /// First `x_k` with `||v_k|| <= eps`.
    FirstSmallVk,
    /// The final iterate `x_K`.
    LastIterate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmoothAlgorithm {
    Sarah,
    Spider,
    SpiderBoost,
}

/// Unset fields take the defaults of the respective convergence result.
#[derive(Debug, Clone)]
pub struct SmoothSolverConfig {
    pub eta: Option<f64>,
    pub q: Option<usize>,
    pub batch: Option<usize>,
    pub max_iters: Option<usize>,
    pub target_eps: f64,
    pub seed: u64,
    pub output_rule: Option<OutputRule>,
    pub sampling: Option<SamplingMode>,
    /// SPIDER only: stop at the first `||v_k|| <= eps`. When `false` the run
    /// continues for the full budget (the output is still the first such point).
    pub stop_at_target: bool,
    pub x0: Option<Array1<f64>>,
    pub trace: TraceOptions,
}

impl SmoothSolverConfig {
    pub fn new(target_eps: f64, seed: u64) -> Self {
        Self {
            eta: None,
            q: None,
            batch: None,
            max_iters: None,
            target_eps,
            seed,
            output_rule: None,
            sampling: None,
            stop_at_target: true,
            x0: None,
            trace: TraceOptions::default(),
        }
    }
}

/// Estimator stream and auxiliary stream (output index, restarts) of a run.
pub(crate) fn run_streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let est = ChaCha8Rng::seed_from_u64(seed);
    let mut aux = ChaCha8Rng::seed_from_u64(seed);
    aux.set_stream(1);
    (est, aux)
}

pub(crate) fn initial_point(x0: &Option<Array1<f64>>, dim: usize) -> Result<Array1<f64>> {
    match x0 {
        Some(x) => {
            check_dim(dim, x.len())?;
            Ok(x.clone())
        }
        None => Ok(Array1::zeros(dim)),
    }
}

pub(crate) fn iteration_gap<P: FiniteSum + ?Sized>(
    problem: &P,
    x0: &Array1<f64>,
    extra: f64,
) -> Result<f64> {
    let lb = problem.optimum_lower_bound().ok_or_else(|| {
        Error::Config("max_iters is required when the problem has no known lower bound".into())
    })?;
    Ok((problem.value(x0) + extra - lb).max(f64::MIN_POSITIVE))
}

fn resolve<P: FiniteSum + ?Sized>(
    problem: &P,
    cfg: &SmoothSolverConfig,
    algo: SmoothAlgorithm,
    x0: &Array1<f64>,
) -> Result<ResolvedParams> {
    if !(cfg.target_eps > 0.0) {
        return Err(Error::Config(format!("target eps = {}", cfg.target_eps)));
    }
    let n = problem.num_components();
    let l = problem.lipschitz();
    let q = cfg.q.unwrap_or_else(|| ceil_sqrt(n));
    let batch = cfg.batch.unwrap_or_else(|| ceil_sqrt(n));
    if q == 0 || batch == 0 {
        return Err(Error::Config("q and batch must be positive".into()));
    }
    let mut notes = Vec::new();
    let eta = match (cfg.eta, algo) {
        (Some(e), _) => e,
        (None, SmoothAlgorithm::SpiderBoost) => 1.0 / (2.0 * l),
        (None, SmoothAlgorithm::Spider) => cfg.target_eps / l,
        (None, SmoothAlgorithm::Sarah) => 1.0 / (l * (q as f64).sqrt()),
    };
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!("stepsize {eta}")));
    }
    let feasibility = beta1(eta, l, q, batch);
    if algo == SmoothAlgorithm::SpiderBoost
        && cfg.eta.is_none()
        && cfg.q.is_none()
        && cfg.batch.is_none()
    {
        if feasibility <= 0.0 {
            return Err(Error::Config(format!(
                "beta_1 = {feasibility} is not positive"
            )));
        }
        notes.push(format!("default parameters: beta_1 = {feasibility:e}"));
    }
    let max_iters = match cfg.max_iters {
        Some(k) => k,
        None => {
            let gap = iteration_gap(problem, x0, 0.0)?;
            notes.push(format!("iteration budget from f(x0) - f* <= {gap:e}"));
            finite_sum_iterations(l, gap, cfg.target_eps, 1.0)
        }
    };
    if max_iters == 0 {
        return Err(Error::Config("max_iters must be positive".into()));
    }
    Ok(ResolvedParams {
        eta,
        q,
        batch,
        anchor_batch: n,
        max_iters,
        feasibility,
        notes,
    })
}

fn metrics<P: FiniteSum + ?Sized>(
    problem: &P,
    x: &Array1<f64>,
    ledger: &mut SfoLedger,
) -> Result<Metrics> {
    let g = diagnostic_gradient(problem, x, ledger)?;
    Ok(Metrics {
        gradnorm: Some(norm(&g)),
        loss: Some(problem.value(x)),
        gnorm_eta: None,
    })
}

const NO_METRICS: Metrics = Metrics {
    gradnorm: None,
    loss: None,
    gnorm_eta: None,
};

struct Loop<'p, P: ?Sized> {
    problem: &'p P,
    params: ResolvedParams,
    est: SpiderEstimator,
    aux: ChaCha8Rng,
    ledger: SfoLedger,
    rec: Recorder,
}

impl<'p, P: FiniteSum + ?Sized> Loop<'p, P> {
    fn new(
        problem: &'p P,
        params: ResolvedParams,
        cfg: &SmoothSolverConfig,
        default_mode: SamplingMode,
    ) -> Result<Self> {
        let (est_rng, aux) = run_streams(cfg.seed);
        let mode = cfg.sampling.unwrap_or(default_mode);
        let est = SpiderEstimator::new(problem.dim(), params.q, params.batch, mode, est_rng)?;
        Ok(Self {
            problem,
            params,
            est,
            aux,
            ledger: SfoLedger::new(),
            rec: Recorder::new(cfg.trace),
        })
    }

    /// Anchor or recursive update at `x_k`.
    fn estimate(&mut self, k: usize, x: &Array1<f64>) -> Result<()> {
        if k.is_multiple_of(self.params.q) {
            let g = full_gradient(self.problem, x, &mut self.ledger)?;
            self.ledger
                .charge_epoch_convention(self.params.anchor_batch);
            self.est.refresh(g, x)?;
        } else {
            self.est.spider_step(self.problem, x, &mut self.ledger)?;
        }
        self.ledger.charge_epoch_convention(self.params.batch);
        Ok(())
    }

    fn record(&mut self, k: usize, x: &Array1<f64>, last: bool) -> Result<()> {
        if !self.rec.due(k, last) {
            return Ok(());
        }
        let m = if self.rec.diagnostics() {
            metrics(self.problem, x, &mut self.ledger)?
        } else {
            NO_METRICS
        };
        let vnorm = norm(self.est.estimate());
        self.rec.push(k, &self.ledger, Some(vnorm), m);
        Ok(())
    }

    fn finish(
        mut self,
        x_out: Array1<f64>,
        output_index: usize,
        iterations: usize,
        converged: bool,
    ) -> Result<SolverOutput> {
        let output_grad_norm = if self.rec.diagnostics() {
            Some(norm(&diagnostic_gradient(
                self.problem,
                &x_out,
                &mut self.ledger,
            )?))
        } else {
            None
        };
        Ok(SolverOutput {
            x_out,
            trace: RunTrace {
                records: self.rec.records,
                params: self.params,
                ledger: self.ledger,
                iterations,
                output_index,
                output_grad_norm,
                converged,
                epoch_stationarity: Vec::new(),
            },
        })
    }
}

fn check_finite(x: &Array1<f64>, k: usize) -> Result<()> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { k })
    }
}

/// SpiderBoost: full-gradient anchor every `q` steps, recursive estimator in
/// between, plain step `x_{k+1} = x_k - eta v_k`.
pub fn run_spiderboost<P: FiniteSum + ?Sized>(
    problem: &P,
    cfg: &SmoothSolverConfig,
) -> Result<SolverOutput> {
    let mut x = initial_point(&cfg.x0, problem.dim())?;
    let params = resolve(problem, cfg, SmoothAlgorithm::SpiderBoost, &x)?;
    let rule = cfg.output_rule.unwrap_or(OutputRule::RandomIterate);
    let mut lp = Loop::new(problem, params, cfg, SamplingMode::WithReplacement)?;
    let (eta, iters) = (lp.params.eta, lp.params.max_iters);

    // drawn up front from the run's own stream so only x_xi needs keeping
    let xi = lp.aux.random_range(0..iters);
    let mut kept: Option<(usize, Array1<f64>)> = None;
    for k in 0..iters {
        lp.estimate(k, &x)?;
        lp.record(k, &x, k + 1 == iters)?;
        let v = lp.est.estimate();
        match rule {
            OutputRule::RandomIterate if k == xi => kept = Some((k, x.clone())),
            OutputRule::FirstSmallVk if kept.is_none() && norm(v) <= cfg.target_eps => {
                kept = Some((k, x.clone()))
            }
            _ => {}
        }
        x.scaled_add(-eta, v);
        check_finite(&x, k + 1)?;
    }
    let converged = rule != OutputRule::FirstSmallVk || kept.is_some();
    let (idx, x_out) = kept.unwrap_or((iters, x));
    lp.finish(x_out, idx, iters, converged)
}

/// SPIDER: normalized step `x_{k+1} = x_k - eta v_k / ||v_k||`, output the first
/// `x_k` with `||v_k|| <= eps`.
pub fn run_spider<P: FiniteSum + ?Sized>(
    problem: &P,
    cfg: &SmoothSolverConfig,
) -> Result<SolverOutput> {
    let mut x = initial_point(&cfg.x0, problem.dim())?;
    let params = resolve(problem, cfg, SmoothAlgorithm::Spider, &x)?;
    let rule = cfg.output_rule.unwrap_or(OutputRule::FirstSmallVk);
    let mut lp = Loop::new(problem, params, cfg, SamplingMode::WithReplacement)?;
    let (eta, iters) = (lp.params.eta, lp.params.max_iters);

    let xi = lp.aux.random_range(0..iters);
    let mut first_small: Option<(usize, Array1<f64>)> = None;
    let mut sampled: Option<(usize, Array1<f64>)> = None;
    let mut done = iters;
    for k in 0..iters {
        lp.estimate(k, &x)?;
        let vnorm = norm(lp.est.estimate());
        let small = first_small.is_none() && vnorm <= cfg.target_eps;
        let stop = small && cfg.stop_at_target;
        lp.record(k, &x, k + 1 == iters || stop)?;
        if k == xi {
            sampled = Some((k, x.clone()));
        }
        if small {
            first_small = Some((k, x.clone()));
        }
        if stop || vnorm == 0.0 {
            done = k + 1;
            break;
        }
        x.scaled_add(-eta / vnorm, lp.est.estimate());
        check_finite(&x, k + 1)?;
    }
    let converged = first_small.is_some();
    let (idx, x_out) = match rule {
        OutputRule::FirstSmallVk => first_small.unwrap_or((done, x)),
        OutputRule::RandomIterate => sampled.or(first_small).unwrap_or((done, x)),
        OutputRule::LastIterate => (done, x),
    };
    lp.finish(x_out, idx, done, converged)
}

/// SARAH: at each epoch boundary jump to a uniformly chosen iterate among the
/// `q` produced during the finished epoch, then re-anchor; inner samples are
/// drawn without replacement by default.
pub fn run_sarah<P: FiniteSum + ?Sized>(
    problem: &P,
    cfg: &SmoothSolverConfig,
) -> Result<SolverOutput> {
    let mut x = initial_point(&cfg.x0, problem.dim())?;
    let params = resolve(problem, cfg, SmoothAlgorithm::Sarah, &x)?;
    let rule = cfg.output_rule.unwrap_or(OutputRule::RandomIterate);
    let mut lp = Loop::new(problem, params, cfg, SamplingMode::WithoutReplacement)?;
    let (eta, iters, q) = (lp.params.eta, lp.params.max_iters, lp.params.q);

    let xi = lp.aux.random_range(0..iters);
    let mut kept: Option<(usize, Array1<f64>)> = None;
    // iterates x_{k-q+1}, ..., x_k produced by the current epoch
    let mut produced: Vec<Array1<f64>> = Vec::with_capacity(q);
    for k in 0..iters {
        if k % q == 0 && k > 0 {
            let j = lp.aux.random_range(0..produced.len());
            x = produced.swap_remove(j);
        }
        if k % q == 0 {
            produced.clear();
        }
        lp.estimate(k, &x)?;
        lp.record(k, &x, k + 1 == iters)?;
        let v = lp.est.estimate();
        match rule {
            OutputRule::RandomIterate if k == xi => kept = Some((k, x.clone())),
            OutputRule::FirstSmallVk if kept.is_none() && norm(v) <= cfg.target_eps => {
                kept = Some((k, x.clone()))
            }
            _ => {}
        }
        x.scaled_add(-eta, v);
        check_finite(&x, k + 1)?;
        produced.push(x.clone());
    }
    let converged = rule != OutputRule::FirstSmallVk || kept.is_some();
    let (idx, x_out) = kept.unwrap_or((iters, x));
    lp.finish(x_out, idx, iters, converged)
}

pub fn run_smooth<P: FiniteSum + ?Sized>(
    algo: SmoothAlgorithm,
    problem: &P,
    cfg: &SmoothSolverConfig,
) -> Result<SolverOutput> {
    match algo {
        SmoothAlgorithm::Sarah => run_sarah(problem, cfg),
        SmoothAlgorithm::Spider => run_spider(problem, cfg),
        SmoothAlgorithm::SpiderBoost => run_spiderboost(problem, cfg),
    }
}
