//! The recursive SARAH/SPIDER gradient estimator
//!
//! `v_k = v_{k-1} + (1/|S|) sum_{i in S} (grad f_i(x_k) - grad f_i(x_{k-1}))`,
//!
//! re-anchored every `q` steps, and a Monte-Carlo probe of its mean-squared
//! error against the telescoped one-step variance bound.

use ndarray::Array1;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ledger::SfoLedger;
use crate::problem::{full_gradient, FiniteSum, OnlineOracle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    WithReplacement,
    WithoutReplacement,
}

/// Anything the estimator can draw component gradients from.
pub trait GradientSource {
    fn dim(&self) -> usize;

    fn draw_batch(&self, rng: &mut ChaCha8Rng, size: usize, mode: SamplingMode)
        -> Result<Vec<u64>>;

    /// `out += scale * grad f_s(x)` for the sample `s`.
    fn add_sample_gradient(&self, sample: u64, x: &Array1<f64>, scale: f64, out: &mut Array1<f64>);
}

impl<P: FiniteSum + ?Sized> GradientSource for P {
    fn dim(&self) -> usize {
        FiniteSum::dim(self)
    }

    fn draw_batch(
        &self,
        rng: &mut ChaCha8Rng,
        size: usize,
        mode: SamplingMode,
    ) -> Result<Vec<u64>> {
        let n = self.num_components();
        match mode {
            SamplingMode::WithReplacement => {
                Ok((0..size).map(|_| rng.random_range(0..n) as u64).collect())
            }
            SamplingMode::WithoutReplacement => {
                if size > n {
                    return Err(Error::InvalidArgument(format!(
                        "cannot draw {size} of {n} components without replacement"
                    )));
                }
                Ok(sample(rng, n, size).into_iter().map(|i| i as u64).collect())
            }
        }
    }

    fn add_sample_gradient(&self, sample: u64, x: &Array1<f64>, scale: f64, out: &mut Array1<f64>) {
        self.add_component_gradient(sample as usize, x, scale, out);
    }
}

/// Adapter exposing an [`OnlineOracle`] as a [`GradientSource`]. Online draws
/// are always i.i.d.; the sampling mode is ignored.
pub struct OnlineSource<'a, O: ?Sized>(pub &'a O);

impl<O: OnlineOracle + ?Sized> GradientSource for OnlineSource<'_, O> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn draw_batch(
        &self,
        rng: &mut ChaCha8Rng,
        size: usize,
        _mode: SamplingMode,
    ) -> Result<Vec<u64>> {
        Ok((0..size).map(|_| self.0.draw(rng)).collect())
    }

    fn add_sample_gradient(&self, sample: u64, x: &Array1<f64>, scale: f64, out: &mut Array1<f64>) {
        self.0.add_sample_gradient(sample, x, scale, out);
    }
}

/// Mean of `size` freshly drawn sample gradients at `x`; bills `size` units.
pub fn sample_mean_gradient<S: GradientSource + ?Sized>(
    source: &S,
    x: &Array1<f64>,
    size: usize,
    mode: SamplingMode,
    rng: &mut ChaCha8Rng,
    ledger: &mut SfoLedger,
) -> Result<Array1<f64>> {
    check_dim(source.dim(), x.len())?;
    if size == 0 {
        return Err(Error::InvalidArgument(
            "anchor batch size must be positive".into(),
        ));
    }
    let batch = source.draw_batch(rng, size, mode)?;
    let mut acc = Array1::zeros(x.len());
    for &s in &batch {
        source.add_sample_gradient(s, x, 1.0, &mut acc);
    }
    ledger.charge_components(size);
    Ok(acc / size as f64)
}

#[derive(Debug, Clone)]
pub struct SpiderEstimator {
    v: Array1<f64>,
    prev_x: Array1<f64>,
    epoch_len: usize,
    batch_size: usize,
    iter_in_epoch: usize,
    refreshed: bool,
    mode: SamplingMode,
    rng: ChaCha8Rng,
    // per-sample scratch, so identical points give an exactly zero increment
    at_new: Array1<f64>,
    at_prev: Array1<f64>,
}

impl SpiderEstimator {
    pub fn new(
        dim: usize,
        epoch_len: usize,
        batch_size: usize,
        mode: SamplingMode,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if epoch_len == 0 || batch_size == 0 || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "dim = {dim}, epoch length = {epoch_len}, batch = {batch_size}"
            )));
        }
        Ok(Self {
            v: Array1::zeros(dim),
            prev_x: Array1::zeros(dim),
            epoch_len,
            batch_size,
            iter_in_epoch: 0,
            refreshed: false,
            mode,
            rng,
            at_new: Array1::zeros(dim),
            at_prev: Array1::zeros(dim),
        })
    }

    pub fn seeded(
        dim: usize,
        epoch_len: usize,
        batch_size: usize,
        mode: SamplingMode,
        seed: u64,
    ) -> Result<Self> {
        Self::new(
            dim,
            epoch_len,
            batch_size,
            mode,
            ChaCha8Rng::seed_from_u64(seed),
        )
    }

    pub fn estimate(&self) -> &Array1<f64> {
        &self.v
    }

    pub fn epoch_len(&self) -> usize {
        self.epoch_len
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    pub fn iter_in_epoch(&self) -> usize {
        self.iter_in_epoch
    }

    pub fn sampling_mode(&self) -> SamplingMode {
        self.mode
    }

    /// True when the next iteration index is a multiple of `q`.
    pub fn refresh_due(&self) -> bool {
        !self.refreshed || self.iter_in_epoch + 1 >= self.epoch_len
    }

    pub fn rng_mut(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn refresh(&mut self, anchor_grad: Array1<f64>, x: &Array1<f64>) -> Result<()> {
        check_dim(self.v.len(), anchor_grad.len())?;
        check_dim(self.v.len(), x.len())?;
        self.v = anchor_grad;
        self.prev_x.assign(x);
        self.iter_in_epoch = 0;
        self.refreshed = true;
        Ok(())
    }

    /// One recursive update at `x_new`; bills `2 |S|` units.
    pub fn spider_step<S: GradientSource + ?Sized>(
        &mut self,
        source: &S,
        x_new: &Array1<f64>,
        ledger: &mut SfoLedger,
    ) -> Result<&Array1<f64>> {
        check_dim(self.v.len(), x_new.len())?;
        if !self.refreshed {
            return Err(Error::NotRefreshed);
        }
        if self.refresh_due() {
            return Err(Error::EpochViolation {
                iter_in_epoch: self.iter_in_epoch + 1,
                epoch_len: self.epoch_len,
            });
        }
        let batch = source.draw_batch(&mut self.rng, self.batch_size, self.mode)?;
        let mut increment = Array1::zeros(self.v.len());
        for &s in &batch {
            self.at_new.fill(0.0);
            self.at_prev.fill(0.0);
            source.add_sample_gradient(s, x_new, 1.0, &mut self.at_new);
            source.add_sample_gradient(s, &self.prev_x, 1.0, &mut self.at_prev);
            increment += &(&self.at_new - &self.at_prev);
        }
        increment /= batch.len() as f64;
        self.v += &increment;
        self.prev_x.assign(x_new);
        self.iter_in_epoch += 1;
        ledger.charge_components(2 * batch.len());
        Ok(&self.v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceProbeConfig {
    pub batch_size: usize,
    pub mode: SamplingMode,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceGapStep {
    pub k: usize,
    /// Monte-Carlo mean of `||v_k - grad f(x_k)||^2`.
    pub empirical: f64,
    pub standard_error: f64,
    /// `(L^2/|S2|) sum_{i<k} ||x_{i+1} - x_i||^2 + eps1^2` with `eps1 = 0`.
    pub bound: f64,
    /// Empirical mean exceeds the bound by more than three standard errors.
    pub exceeds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceGapReport {
    pub steps: Vec<VarianceGapStep>,
}

impl VarianceGapReport {
    pub fn all_within_bound(&self) -> bool {
        self.steps.iter().all(|s| !s.exceeds)
    }
}

/// Replays `trajectory` `trials` times with independently seeded estimators
/// anchored at the exact gradient of its first point.
pub fn variance_gap_estimate<P: FiniteSum + ?Sized>(
    cfg: &VarianceProbeConfig,
    problem: &P,
    trajectory: &[Array1<f64>],
    trials: usize,
) -> Result<VarianceGapReport> {
    if trajectory.len() < 2 {
        return Err(Error::InvalidArgument(
            "trajectory needs at least 2 points".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let d = FiniteSum::dim(problem);
    for x in trajectory {
        check_dim(d, x.len())?;
    }
    let mut scratch = SfoLedger::new();
    let truth: Vec<Array1<f64>> = trajectory
        .iter()
        .map(|x| full_gradient(problem, x, &mut scratch))
        .collect::<Result<_>>()?;

    let steps = trajectory.len();
    let mut sum = vec![0.0; steps];
    let mut sum_sq = vec![0.0; steps];
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial as u64);
        let mut est = SpiderEstimator::new(d, steps, cfg.batch_size, cfg.mode, rng)?;
        est.refresh(truth[0].clone(), &trajectory[0])?;
        for k in 1..steps {
            let v = est.spider_step(problem, &trajectory[k], &mut scratch)?;
            let err = v - &truth[k];
            let e2 = err.dot(&err);
            sum[k] += e2;
            sum_sq[k] += e2 * e2;
        }
    }

    let l = problem.lipschitz();
    let coef = l * l / cfg.batch_size as f64;
    let mut path = 0.0;
    let mut out = Vec::with_capacity(steps);
    for k in 0..steps {
        if k > 0 {
            let dx = &trajectory[k] - &trajectory[k - 1];
            path += dx.dot(&dx);
        }
        let t = trials as f64;
        let mean = sum[k] / t;
        let var = if trials > 1 {
            ((sum_sq[k] / t - mean * mean) * t / (t - 1.0)).max(0.0)
        } else {
            0.0
        };
        let se = (var / t).sqrt();
        let bound = coef * path;
        out.push(VarianceGapStep {
            k,
            empirical: mean,
            standard_error: se,
            bound,
            exceeds: mean - 3.0 * se > bound,
        });
    }
    Ok(VarianceGapReport { steps: out })
}
