use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::logistic::{generate_synthetic_logistic, RegLogisticProblem};
use super::FiniteSum;
use crate::error::{Error, Result};

/// `f(x) = E_zeta[f_zeta(x)]` accessed only through samples.
///
/// A sample is an opaque `u64` id drawn from the distribution; the component
/// `f_zeta` it names is a deterministic function of the id so that the same id
/// can be evaluated at two points (the estimator needs
/// `grad f_zeta(x_k) - grad f_zeta(x_{k-1})` for one draw).
pub trait OnlineOracle: Sync {
    fn dim(&self) -> usize;

    /// Lipschitz constant of every sample gradient.
    fn lipschitz(&self) -> f64;

    /// `sigma^2` with `E ||grad f_zeta(x) - grad f(x)||^2 <= sigma^2` for all x.
    fn variance_bound(&self) -> f64;

    fn draw(&self, rng: &mut ChaCha8Rng) -> u64;

    /// `out += scale * grad f_zeta(x)`.
    fn add_sample_gradient(&self, sample: u64, x: &Array1<f64>, scale: f64, out: &mut Array1<f64>);

    fn sample_value(&self, sample: u64, x: &Array1<f64>) -> f64;

    /// Exact population gradient when the model knows it.
    fn population_gradient(&self, _x: &Array1<f64>) -> Option<Array1<f64>> {
        None
    }

    fn population_value(&self, _x: &Array1<f64>) -> Option<f64> {
        None
    }

    /// A known lower bound on the population objective, if any.
    fn optimum_lower_bound(&self) -> Option<f64> {
        None
    }
}

/// Uniform sampling with replacement from a finite pool; the population
/// objective is the pool average, so its gradient is known exactly.
#[derive(Debug, Clone)]
pub struct PooledOnline<P> {
    pool: P,
    sigma_sq: f64,
}

impl<P: FiniteSum> PooledOnline<P> {
    pub fn new(pool: P, sigma_sq: f64) -> Result<Self> {
        if !(sigma_sq >= 0.0 && sigma_sq.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma_sq = {sigma_sq}")));
        }
        Ok(Self { pool, sigma_sq })
    }

    pub fn pool(&self) -> &P {
        &self.pool
    }
}

impl<P: FiniteSum> OnlineOracle for PooledOnline<P> {
    fn dim(&self) -> usize {
        self.pool.dim()
    }

    fn lipschitz(&self) -> f64 {
        self.pool.lipschitz()
    }

    fn variance_bound(&self) -> f64 {
        self.sigma_sq
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        rng.random_range(0..self.pool.num_components()) as u64
    }

    fn add_sample_gradient(&self, sample: u64, x: &Array1<f64>, scale: f64, out: &mut Array1<f64>) {
        self.pool
            .add_component_gradient(sample as usize, x, scale, out);
    }

    fn sample_value(&self, sample: u64, x: &Array1<f64>) -> f64 {
        self.pool.component_value(sample as usize, x)
    }

    fn population_gradient(&self, x: &Array1<f64>) -> Option<Array1<f64>> {
        let n = self.pool.num_components();
        let mut g = Array1::zeros(self.pool.dim());
        for i in 0..n {
            self.pool.add_component_gradient(i, x, 1.0, &mut g);
        }
        Some(g / n as f64)
    }

    fn population_value(&self, x: &Array1<f64>) -> Option<f64> {
        Some(self.pool.value(x))
    }

    fn optimum_lower_bound(&self) -> Option<f64> {
        self.pool.optimum_lower_bound()
    }
}

/// Online logistic oracle over a large synthetic pool, with
/// `sigma^2` = mean squared feature norm.
pub fn generate_online_logistic(
    pool_size: usize,
    d: usize,
    seed: u64,
    alpha_reg: f64,
) -> Result<PooledOnline<RegLogisticProblem>> {
    let pool = generate_synthetic_logistic(pool_size, d, seed, alpha_reg)?;
    let sigma_sq = pool.gradient_variance_bound();
    PooledOnline::new(pool, sigma_sq)
}

/// `f_zeta(x) = sum_j a_j x_j^2 / 2 - zeta.x` with `zeta ~ N(b, s^2 I)`.
///
/// Population gradient `A x - b`; gradient variance exactly `d s^2`.
#[derive(Debug, Clone)]
pub struct NoisyQuadratic {
    curvature: Array1<f64>,
    center: Array1<f64>,
    noise_std: f64,
}

impl NoisyQuadratic {
    pub fn new(curvature: Array1<f64>, center: Array1<f64>, noise_std: f64) -> Result<Self> {
        if curvature.len() != center.len() || curvature.is_empty() {
            return Err(Error::InvalidArgument(
                "curvature/center length mismatch".into(),
            ));
        }
        if !(noise_std >= 0.0) {
            return Err(Error::InvalidArgument(format!("noise_std = {noise_std}")));
        }
        Ok(Self {
            curvature,
            center,
            noise_std,
        })
    }

    fn zeta(&self, sample: u64) -> Array1<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(sample);
        self.center
            .mapv(|b| b + self.noise_std * rng.sample::<f64, _>(StandardNormal))
    }
}

impl OnlineOracle for NoisyQuadratic {
    fn dim(&self) -> usize {
        self.curvature.len()
    }

    fn lipschitz(&self) -> f64 {
        self.curvature.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn variance_bound(&self) -> f64 {
        self.dim() as f64 * self.noise_std * self.noise_std
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        rng.random()
    }

    fn add_sample_gradient(&self, sample: u64, x: &Array1<f64>, scale: f64, out: &mut Array1<f64>) {
        let zeta = self.zeta(sample);
        for j in 0..x.len() {
            out[j] += scale * (self.curvature[j] * x[j] - zeta[j]);
        }
    }

    fn sample_value(&self, sample: u64, x: &Array1<f64>) -> f64 {
        let zeta = self.zeta(sample);
        0.5 * (&self.curvature * x * x).sum() - zeta.dot(x)
    }

    fn population_gradient(&self, x: &Array1<f64>) -> Option<Array1<f64>> {
        Some(&self.curvature * x - &self.center)
    }

    fn population_value(&self, x: &Array1<f64>) -> Option<f64> {
        Some(0.5 * (&self.curvature * x * x).sum() - self.center.dot(x))
    }

    fn optimum_lower_bound(&self) -> Option<f64> {
        let mut lb = 0.0;
        for (&a, &b) in self.curvature.iter().zip(self.center.iter()) {
            if a > 0.0 {
                lb -= b * b / (2.0 * a);
            } else if b != 0.0 || a < 0.0 {
                return None;
            }
        }
        Some(lb)
    }
}
