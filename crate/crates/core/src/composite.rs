//! Proximal SpiderBoost for `Psi(x) = f(x) + h(x)`: finite-sum, online and
//! gradient-dominated variants, with Euclidean or entropy mirror steps.

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bregman::{bregman_prox_step, step_generalized_gradient, BregmanGeometry, Kernel};
use crate::error::{check_dim, Error, Result};
use crate::estimator::{
    sample_mean_gradient, GradientSource, OnlineSource, SamplingMode, SpiderEstimator,
};
use crate::ledger::SfoLedger;
use crate::params::{
    beta2, ceil_sqrt, finite_sum_iterations, gd_contraction_factor, gd_epoch_length,
    online_anchor_size, online_iterations, BREGMAN_ALPHA_GATE,
};
use crate::problem::{diagnostic_gradient, full_gradient, FiniteSum, OnlineOracle};
use crate::prox::{generalized_gradient_from, Regularizer};
use crate::smooth::run_streams;
use crate::trace::{norm, Metrics, Recorder, ResolvedParams, RunTrace, SolverOutput, TraceOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompositeAlgorithm {
    ProxSpiderBoost,
    ProxSpiderBoostGd,
    ProxSpiderBoostO,
}

/// Unset fields take the defaults of the respective convergence result.
#[derive(Debug, Clone)]
pub struct CompositeSolverConfig {
    pub eta: Option<f64>,
    pub q: Option<usize>,
    /// Online anchor batch; ignored by the finite-sum variants, which anchor on
    /// the full gradient.
    pub s1: Option<usize>,
    /// Inner batch.
    pub s2: Option<usize>,
    pub max_iters: Option<usize>,
    pub target_eps: f64,
    /// Online variance bound; defaults to the oracle's own.
    pub sigma_sq: Option<f64>,
    pub geometry: BregmanGeometry,
    pub reg: Regularizer,
    pub seed: u64,
    /// Gradient-dominance constant, used to size epochs of the `gd` variant.
    pub tau: Option<f64>,
    /// `q = ceil(epoch_constant * L * tau)` for the `gd` variant.
    pub epoch_constant: f64,
    /// Epoch cap for the `gd` variant when `max_iters` is unset.
    pub max_epochs: usize,
    /// `gd` variant: stop at the first epoch start with `||G_eta|| <= eps`.
    pub stop_at_target: bool,
    pub sampling: Option<SamplingMode>,
    pub x0: Option<Array1<f64>>,
    pub trace: TraceOptions,
}

impl CompositeSolverConfig {
    pub fn new(target_eps: f64, seed: u64) -> Self {
        Self {
            eta: None,
            q: None,
            s1: None,
            s2: None,
            max_iters: None,
            target_eps,
            sigma_sq: None,
            geometry: BregmanGeometry::euclidean(),
            reg: Regularizer::Zero,
            seed,
            tau: None,
            epoch_constant: 128.0,
            max_epochs: 100,
            stop_at_target: true,
            sampling: None,
            x0: None,
            trace: TraceOptions::default(),
        }
    }
}

fn composite_initial_point(cfg: &CompositeSolverConfig, dim: usize) -> Result<Array1<f64>> {
    let x = match &cfg.x0 {
        Some(x) => {
            check_dim(dim, x.len())?;
            x.clone()
        }
        None => match cfg.geometry.kernel {
            Kernel::Euclidean => Array1::zeros(dim),
            Kernel::Entropy => Array1::from_elem(dim, 1.0 / dim as f64),
        },
    };
    if cfg.geometry.kernel == Kernel::Entropy && !cfg.geometry.contains(&x) {
        return Err(Error::Domain("initial point is not in the simplex".into()));
    }
    Ok(x)
}

fn regularizer_lower_bound(reg: &Regularizer) -> Option<f64> {
    match reg {
        Regularizer::Zero | Regularizer::L1 { .. } | Regularizer::Box { .. } => Some(0.0),
        Regularizer::Custom(_) => None,
    }
}

fn budget_gap(
    value_at_x0: Option<f64>,
    f_lb: Option<f64>,
    reg: &Regularizer,
    x0: &Array1<f64>,
) -> Result<f64> {
    match (value_at_x0, f_lb, regularizer_lower_bound(reg)) {
        (Some(f0), Some(flb), Some(hlb)) => {
            let h0 = reg.value(x0);
            if !h0.is_finite() {
                return Err(Error::Domain(
                    "regularizer is infinite at the initial point".into(),
                ));
            }
            Ok((f0 + h0 - flb - hlb).max(f64::MIN_POSITIVE))
        }
        _ => Err(Error::Config(
            "max_iters is required when no lower bound on the objective is known".into(),
        )),
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("target eps = {eps}")))
    }
}

fn check_alpha_gate(alpha: f64) -> Result<()> {
    if alpha > BREGMAN_ALPHA_GATE {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "kernel modulus {alpha} must exceed 7/8"
        )))
    }
}

/// `G_eta(x)` from the true gradient, through the same mirror step the solver
/// takes; billed as one diagnostic PO.
pub fn stationarity_measure(
    geom: &BregmanGeometry,
    reg: &Regularizer,
    x: &Array1<f64>,
    grad: &Array1<f64>,
    eta: f64,
    ledger: &mut SfoLedger,
) -> Result<Array1<f64>> {
    let g = if geom.kernel == Kernel::Euclidean && geom.alpha == 1.0 {
        generalized_gradient_from(reg, x, grad, eta)?
    } else {
        let mut scratch = SfoLedger::new();
        let next = bregman_prox_step(geom, reg, x, grad, eta, &mut scratch)?;
        step_generalized_gradient(x, &next, eta)
    };
    ledger.charge_diagnostic_prox();
    Ok(g)
}

type AnchorFn<'a> =
    dyn FnMut(&Array1<f64>, &mut ChaCha8Rng, &mut SfoLedger) -> Result<Array1<f64>> + 'a;
/// True gradient and objective value at a point, when available.
/// Gradient and value at a recorded iterate, if the model can provide them.
type Probe = Result<Option<(Array1<f64>, f64)>>;
type ProbeFn<'a> = dyn Fn(&Array1<f64>, &mut SfoLedger) -> Probe + 'a;

struct Setup<'a, S: ?Sized> {
    source: &'a S,
    params: ResolvedParams,
    mode: SamplingMode,
    gd: bool,
}

fn composite_loop<S: GradientSource + ?Sized>(
    setup: Setup<'_, S>,
    cfg: &CompositeSolverConfig,
    mut x: Array1<f64>,
    anchor: &mut AnchorFn<'_>,
    probe: &ProbeFn<'_>,
) -> Result<SolverOutput> {
    let Setup {
        source,
        params,
        mode,
        gd,
    } = setup;
    let (eta, q, s2, iters) = (params.eta, params.q, params.batch, params.max_iters);
    let (est_rng, mut aux) = run_streams(cfg.seed);
    let mut est = SpiderEstimator::new(source.dim(), q, s2, mode, est_rng)?;
    let mut ledger = SfoLedger::new();
    let mut rec = Recorder::new(cfg.trace);
    let geom = &cfg.geometry;
    let reg = &cfg.reg;

    let xi = aux.random_range(0..iters);
    let mut kept: Option<(usize, Array1<f64>)> = None;
    // gd variant: iterates x_{k-q}, ..., x_k of the current epoch
    let mut epoch: Vec<Array1<f64>> = Vec::new();
    let mut epoch_stationarity = Vec::new();
    let mut reached = false;
    let mut done = iters;

    for k in 0..iters {
        if gd && k % q == 0 {
            if k > 0 {
                // restart from x_j, j uniform on {k-q+1, ..., k-2}
                let j = aux.random_range(1..=q - 2);
                x = epoch.swap_remove(j);
            }
            epoch.clear();
            epoch.push(x.clone());
        }
        if k % q == 0 {
            let g = anchor(&x, est.rng_mut(), &mut ledger)?;
            ledger.charge_epoch_convention(params.anchor_batch);
            est.refresh(g, &x)?;
        } else {
            est.spider_step(source, &x, &mut ledger)?;
        }
        ledger.charge_epoch_convention(s2);

        if rec.due(k, k + 1 == iters) {
            let m = if rec.diagnostics() {
                match probe(&x, &mut ledger)? {
                    Some((g, value)) => {
                        let ge = stationarity_measure(geom, reg, &x, &g, eta, &mut ledger)?;
                        Metrics {
                            gradnorm: Some(norm(&g)),
                            loss: Some(value + reg.value(&x)),
                            gnorm_eta: Some(norm(&ge)),
                        }
                    }
                    None => Metrics {
                        gradnorm: None,
                        loss: None,
                        gnorm_eta: None,
                    },
                }
            } else {
                Metrics {
                    gradnorm: None,
                    loss: None,
                    gnorm_eta: None,
                }
            };
            rec.push(k, &ledger, Some(norm(est.estimate())), m);
        }

        let next = bregman_prox_step(geom, reg, &x, est.estimate(), eta, &mut ledger)?;
        if gd && k % q == 0 {
            // the anchor is exact here, so this step measures G_eta(x_k) for free
            let g = norm(&step_generalized_gradient(&x, &next, eta));
            epoch_stationarity.push(g);
            if cfg.stop_at_target && g <= cfg.target_eps {
                reached = true;
                kept = Some((k, x.clone()));
                done = k + 1;
                break;
            }
        }
        if !gd && k == xi {
            kept = Some((k, x.clone()));
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { k: k + 1 });
        }
        if gd {
            epoch.push(next.clone());
        }
        x = next;
    }

    let (output_index, x_out) = match kept {
        Some(p) => p,
        None if gd && epoch.len() == q + 1 => {
            let j = aux.random_range(1..=q - 2);
            (iters - q + j, epoch.swap_remove(j))
        }
        None => (done, x),
    };
    let output_grad_norm = if rec.diagnostics() {
        match probe(&x_out, &mut ledger)? {
            Some((g, _)) => Some(norm(&stationarity_measure(
                geom,
                reg,
                &x_out,
                &g,
                eta,
                &mut ledger,
            )?)),
            None => None,
        }
    } else {
        None
    };
    Ok(SolverOutput {
        x_out,
        trace: RunTrace {
            records: rec.records,
            params,
            ledger,
            iterations: done,
            output_index,
            output_grad_norm,
            converged: !gd || reached || !cfg.stop_at_target,
            epoch_stationarity,
        },
    })
}

fn finite_probe<'a, P: FiniteSum + ?Sized>(
    problem: &'a P,
) -> impl Fn(&Array1<f64>, &mut SfoLedger) -> Probe + 'a {
    move |x, ledger| {
        Ok(Some((
            diagnostic_gradient(problem, x, ledger)?,
            problem.value(x),
        )))
    }
}

/// Prox-SpiderBoost on a finite sum: full-gradient anchor every `q` steps and
/// the mirror step `x_{k+1} = argmin_y <v_k, y> + h(y) + V(y, x_k) / eta`.
pub fn run_prox_spiderboost<P: FiniteSum + ?Sized>(
    problem: &P,
    cfg: &CompositeSolverConfig,
) -> Result<SolverOutput> {
    check_eps(cfg.target_eps)?;
    let x0 = composite_initial_point(cfg, problem.dim())?;
    let n = problem.num_components();
    let l = problem.lipschitz();
    let alpha = cfg.geometry.alpha;
    let q = cfg.q.unwrap_or_else(|| ceil_sqrt(n));
    let s2 = cfg.s2.unwrap_or_else(|| ceil_sqrt(n));
    let eta = cfg.eta.unwrap_or(1.0 / (2.0 * l));
    let mut notes = Vec::new();
    let feasibility = beta2(alpha, eta, l, q, s2);
    if cfg.eta.is_none() && cfg.q.is_none() && cfg.s2.is_none() {
        check_alpha_gate(alpha)?;
        notes.push(format!("default parameters: beta_2 = {feasibility:e}"));
    }
    let max_iters = match cfg.max_iters {
        Some(k) => k,
        None => {
            check_alpha_gate(alpha)?;
            let gap = budget_gap(
                Some(problem.value(&x0)),
                problem.optimum_lower_bound(),
                &cfg.reg,
                &x0,
            )?;
            notes.push(format!("iteration budget from Psi(x0) - Psi* <= {gap:e}"));
            finite_sum_iterations(l, gap, cfg.target_eps, alpha)
        }
    };
    let params = validated(eta, q, s2, n, max_iters, feasibility, notes)?;
    let setup = Setup {
        source: problem,
        params,
        mode: cfg.sampling.unwrap_or(SamplingMode::WithReplacement),
        gd: false,
    };
    let mut anchor = |x: &Array1<f64>, _: &mut ChaCha8Rng, ledger: &mut SfoLedger| {
        full_gradient(problem, x, ledger)
    };
    composite_loop(setup, cfg, x0, &mut anchor, &finite_probe(problem))
}

/// Prox-SpiderBoost-gd for gradient-dominated objectives: `eta = 1/(8L)`,
/// single-sample inner steps, epochs of `q = ceil(c L tau)` and a restart at
/// each epoch boundary from an iterate drawn uniformly among
/// `x_{k-q+1}, ..., x_{k-2}`. `max_iters`, when set, should be a multiple of `q`.
pub fn run_prox_spiderboost_gd<P: FiniteSum + ?Sized>(
    problem: &P,
    cfg: &CompositeSolverConfig,
) -> Result<SolverOutput> {
    check_eps(cfg.target_eps)?;
    let x0 = composite_initial_point(cfg, problem.dim())?;
    let n = problem.num_components();
    let l = problem.lipschitz();
    let q = match (cfg.q, cfg.tau) {
        (Some(q), _) => q,
        (None, Some(tau)) if tau > 0.0 => gd_epoch_length(l, tau, cfg.epoch_constant),
        _ => {
            return Err(Error::Config(
                "gradient-dominance mode needs q or a positive tau".into(),
            ))
        }
    };
    if q < 3 {
        return Err(Error::Config(format!(
            "epoch length {q} leaves no restart candidates"
        )));
    }
    let s2 = cfg.s2.unwrap_or(1);
    let eta = cfg.eta.unwrap_or(1.0 / (8.0 * l));
    let mut notes = Vec::new();
    if let Some(tau) = cfg.tau {
        notes.push(format!(
            "epoch contraction factor {:e}",
            gd_contraction_factor(l, tau, q)
        ));
    }
    let max_iters = cfg.max_iters.unwrap_or(q * cfg.max_epochs);
    let feasibility = beta2(cfg.geometry.alpha, eta, l, q, s2);
    let params = validated(eta, q, s2, n, max_iters, feasibility, notes)?;
    let setup = Setup {
        source: problem,
        params,
        mode: cfg.sampling.unwrap_or(SamplingMode::WithReplacement),
        gd: true,
    };
    let mut anchor = |x: &Array1<f64>, _: &mut ChaCha8Rng, ledger: &mut SfoLedger| {
        full_gradient(problem, x, ledger)
    };
    composite_loop(setup, cfg, x0, &mut anchor, &finite_probe(problem))
}

/// Prox-SpiderBoost-o: the anchor is a minibatch of `|S1|` fresh samples and
/// the full gradient is never formed.
pub fn run_prox_spiderboost_o<O: OnlineOracle + ?Sized>(
    oracle: &O,
    cfg: &CompositeSolverConfig,
) -> Result<SolverOutput> {
    check_eps(cfg.target_eps)?;
    let x0 = composite_initial_point(cfg, oracle.dim())?;
    let l = oracle.lipschitz();
    let alpha = cfg.geometry.alpha;
    let sigma_sq = cfg.sigma_sq.unwrap_or_else(|| oracle.variance_bound());
    let mut notes = Vec::new();
    let s1 = match cfg.s1 {
        Some(s) => s,
        None => {
            check_alpha_gate(alpha)?;
            online_anchor_size(sigma_sq, cfg.target_eps, alpha)
        }
    };
    let q = cfg.q.unwrap_or_else(|| ceil_sqrt(s1));
    let s2 = cfg.s2.unwrap_or_else(|| ceil_sqrt(s1));
    let eta = cfg.eta.unwrap_or(1.0 / (2.0 * l));
    let feasibility = beta2(alpha, eta, l, q, s2);
    if cfg.eta.is_none() && cfg.q.is_none() && cfg.s2.is_none() {
        check_alpha_gate(alpha)?;
        notes.push(format!("default parameters: beta_2 = {feasibility:e}"));
    }
    let max_iters = match cfg.max_iters {
        Some(k) => k,
        None => {
            check_alpha_gate(alpha)?;
            let gap = budget_gap(
                oracle.population_value(&x0),
                oracle.optimum_lower_bound(),
                &cfg.reg,
                &x0,
            )?;
            notes.push(format!("iteration budget from Psi(x0) - Psi* <= {gap:e}"));
            online_iterations(l, gap, cfg.target_eps, alpha)
        }
    };
    let params = validated(eta, q, s2, s1, max_iters, feasibility, notes)?;
    let source = OnlineSource(oracle);
    let setup = Setup {
        source: &source,
        params,
        mode: SamplingMode::WithReplacement,
        gd: false,
    };
    let mut anchor = |x: &Array1<f64>, rng: &mut ChaCha8Rng, ledger: &mut SfoLedger| {
        sample_mean_gradient(
            &OnlineSource(oracle),
            x,
            s1,
            SamplingMode::WithReplacement,
            rng,
            ledger,
        )
    };
    let probe = |x: &Array1<f64>, _: &mut SfoLedger| {
        Ok(
            match (oracle.population_gradient(x), oracle.population_value(x)) {
                (Some(g), Some(v)) => Some((g, v)),
                _ => None,
            },
        )
    };
    composite_loop(setup, cfg, x0, &mut anchor, &probe)
}

fn validated(
    eta: f64,
    q: usize,
    batch: usize,
    anchor_batch: usize,
    max_iters: usize,
    feasibility: f64,
    notes: Vec<String>,
) -> Result<ResolvedParams> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!("stepsize {eta}")));
    }
    if q == 0 || batch == 0 || anchor_batch == 0 || max_iters == 0 {
        return Err(Error::Config(format!(
            "q = {q}, batch = {batch}, anchor = {anchor_batch}, max_iters = {max_iters} must be positive"
        )));
    }
    Ok(ResolvedParams {
        eta,
        q,
        batch,
        anchor_batch,
        max_iters,
        feasibility,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub probes: usize,
    /// Probes with `Psi(x) - Psi* > tau ||G_eta(x)||^2`.
    pub violations: usize,
    /// Largest `Psi(x) - Psi* - tau ||G_eta(x)||^2`.
    pub max_margin: f64,
    /// Smallest `tau` that would satisfy every probe.
    pub minimal_tau: f64,
}

/// Empirical check of `Psi(x) - Psi* <= tau ||G_eta(x)||^2` at the probe points.
/// `psi_star` must be supplied; see [`reference_optimum`].
pub fn check_gradient_dominance<P: FiniteSum + ?Sized>(
    problem: &P,
    reg: &Regularizer,
    tau: f64,
    eta: f64,
    probes: &[Array1<f64>],
    psi_star: Option<f64>,
    ledger: &mut SfoLedger,
) -> Result<DominanceReport> {
    let psi_star = psi_star.ok_or(Error::UnknownOptimum)?;
    let mut report = DominanceReport {
        probes: probes.len(),
        violations: 0,
        max_margin: f64::NEG_INFINITY,
        minimal_tau: 0.0,
    };
    for x in probes {
        let g = diagnostic_gradient(problem, x, ledger)?;
        let ge = generalized_gradient_from(reg, x, &g, eta)?;
        ledger.charge_diagnostic_prox();
        let gap = problem.value(x) + reg.value(x) - psi_star;
        let gsq = ge.dot(&ge);
        let margin = gap - tau * gsq;
        if margin > 0.0 {
            report.violations += 1;
        }
        report.max_margin = report.max_margin.max(margin);
        if gap > 0.0 {
            report.minimal_tau =
                report
                    .minimal_tau
                    .max(if gsq > 0.0 { gap / gsq } else { f64::INFINITY });
        }
    }
    Ok(report)
}

/// Deterministic proximal gradient with step `1/L` until `||G|| <= tol` or
/// `max_iters`; returns the point and `Psi` there.
pub fn reference_optimum<P: FiniteSum + ?Sized>(
    problem: &P,
    reg: &Regularizer,
    tol: f64,
    max_iters: usize,
) -> Result<(Array1<f64>, f64)> {
    let eta = 1.0 / problem.lipschitz();
    let mut x = Array1::zeros(problem.dim());
    let mut ledger = SfoLedger::new();
    for _ in 0..max_iters {
        let g = full_gradient(problem, &x, &mut ledger)?;
        let ge = generalized_gradient_from(reg, &x, &g, eta)?;
        if norm(&ge) <= tol {
            break;
        }
        x.scaled_add(-eta, &ge);
    }
    let psi = problem.value(&x) + reg.value(&x);
    Ok((x, psi))
}

pub fn run_composite<P: FiniteSum + ?Sized>(
    algo: CompositeAlgorithm,
    problem: &P,
    cfg: &CompositeSolverConfig,
) -> Result<SolverOutput> {
    match algo {
        CompositeAlgorithm::ProxSpiderBoost => run_prox_spiderboost(problem, cfg),
        CompositeAlgorithm::ProxSpiderBoostGd => run_prox_spiderboost_gd(problem, cfg),
        CompositeAlgorithm::ProxSpiderBoostO => Err(Error::Unsupported(
            "the online variant takes an online oracle; use run_prox_spiderboost_o".into(),
        )),
    }
}
