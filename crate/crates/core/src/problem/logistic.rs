use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::dataset::{Dataset, Features};
use super::{top_eigenvalue, FiniteSum};
use crate::error::{Error, Result};

/// Cross-entropy logistic loss with the smooth nonconvex penalty
/// `alpha_reg * sum_j w_j^2 / (1 + w_j^2)`:
///
/// `f_i(w) = log(1 + exp(x_i.w)) - y_i x_i.w + alpha_reg * sum_j w_j^2/(1+w_j^2)`.
///
/// The penalty is smooth, so it lives inside every component rather than in a
/// proximal term.
#[derive(Debug, Clone)]
pub struct RegLogisticProblem {
    data: Dataset,
    alpha_reg: f64,
    lipschitz: f64,
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl RegLogisticProblem {
    pub fn new(data: Dataset, alpha_reg: f64) -> Result<Self> {
        if !(alpha_reg >= 0.0 && alpha_reg.is_finite()) {
            return Err(Error::InvalidArgument(format!("alpha_reg = {alpha_reg}")));
        }
        // Component Hessian: sigma'(z) x x^T + alpha_reg diag(g''(w_j)),
        // with sigma' <= 1/4 and |g''| <= 2 for g(w) = w^2/(1+w^2).
        let max_row = (0..data.len())
            .map(|i| data.features.row_norm_sq(i))
            .fold(0.0, f64::max);
        let lipschitz = max_row / 4.0 + 2.0 * alpha_reg;
        Ok(Self {
            data,
            alpha_reg,
            lipschitz,
        })
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn alpha_reg(&self) -> f64 {
        self.alpha_reg
    }

    /// `alpha_reg * sum_j w_j^2 / (1 + w_j^2)`, always in `[0, alpha_reg * d)`.
    pub fn regularizer(&self, w: &Array1<f64>) -> f64 {
        self.alpha_reg * w.iter().map(|&v| v * v / (1.0 + v * v)).sum::<f64>()
    }

    /// Smoothness constant of the averaged gradient,
    /// `||X||_2^2 / (4n) + 2 alpha_reg` (power iteration on `X^T X / n`).
    pub fn full_smoothness(&self) -> f64 {
        let n = self.data.len();
        let feats = &self.data.features;
        let top = top_eigenvalue(self.dim(), 200, |v| {
            let mut out = Array1::zeros(v.len());
            for i in 0..n {
                feats.add_row(i, feats.row_dot(i, v) / n as f64, &mut out);
            }
            out
        });
        top / 4.0 + 2.0 * self.alpha_reg
    }

    /// Bound on `E ||grad f_i(w) - grad f(w)||^2`: the data term of each
    /// component gradient is `(sigmoid - y) x_i` with `|sigmoid - y| <= 1`, and
    /// the penalty term is common to all components, so the variance is at most
    /// the mean squared row norm.
    pub fn gradient_variance_bound(&self) -> f64 {
        let n = self.data.len();
        (0..n)
            .map(|i| self.data.features.row_norm_sq(i))
            .sum::<f64>()
            / n as f64
    }
}

impl FiniteSum for RegLogisticProblem {
    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn num_components(&self) -> usize {
        self.data.len()
    }

    fn component_value(&self, i: usize, w: &Array1<f64>) -> f64 {
        let z = self.data.features.row_dot(i, w);
        softplus(z) - self.data.labels[i] * z + self.regularizer(w)
    }

    fn add_component_gradient(&self, i: usize, w: &Array1<f64>, scale: f64, out: &mut Array1<f64>) {
        let z = self.data.features.row_dot(i, w);
        let residual = sigmoid(z) - self.data.labels[i];
        self.data.features.add_row(i, scale * residual, out);
        if self.alpha_reg != 0.0 {
            let c = 2.0 * self.alpha_reg * scale;
            for (o, &v) in out.iter_mut().zip(w.iter()) {
                let s = 1.0 + v * v;
                *o += c * v / (s * s);
            }
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn optimum_lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Standard-normal features, planted weights `w* ~ N(0, I/d)` (unit-variance
/// logits) and labels `y ~ Bernoulli(sigmoid(x.w*))`. Bit-identical for a
/// given seed.
pub fn generate_synthetic_logistic(
    n: usize,
    d: usize,
    seed: u64,
    alpha_reg: f64,
) -> Result<RegLogisticProblem> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidArgument(format!("n = {n}, d = {d}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = 1.0 / (d as f64).sqrt();
    let planted: Array1<f64> = (0..d)
        .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let features = Array2::from_shape_simple_fn((n, d), || rng.sample::<f64, _>(StandardNormal));
    let labels: Array1<f64> = features
        .rows()
        .into_iter()
        .map(|row| {
            let p = sigmoid(row.dot(&planted));
            if rng.random::<f64>() < p {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let data = Dataset::new(Features::Dense(features), labels)?;
    RegLogisticProblem::new(data, alpha_reg)
}
