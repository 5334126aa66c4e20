use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{bottom_eigenvalue, top_eigenvalue, FiniteSum};
use crate::error::{Error, Result};

/// Separable quadratics `f_i(x) = sum_j (c_ij x_j^2 / 2 + l_ij x_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalQuadratic {
    curvature: Array2<f64>,
    linear: Array2<f64>,
    lipschitz: f64,
}

impl DiagonalQuadratic {
    pub fn new(curvature: Array2<f64>, linear: Array2<f64>) -> Result<Self> {
        if curvature.dim() != linear.dim() || curvature.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "curvature {:?} vs linear {:?}",
                curvature.dim(),
                linear.dim()
            )));
        }
        let lipschitz = curvature.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        Ok(Self {
            curvature,
            linear,
            lipschitz,
        })
    }

    /// One-dimensional components `f_i(x) = a_i x^2 / 2 + b_i x`.
    pub fn scalar(curvature: &[f64], linear: &[f64]) -> Result<Self> {
        let n = curvature.len();
        let c = Array2::from_shape_vec((n, 1), curvature.to_vec())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let l = Array2::from_shape_vec((linear.len(), 1), linear.to_vec())
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Self::new(c, l)
    }

    /// `n` copies of `||x||^2 / 2` in `d` dimensions.
    pub fn isotropic(n: usize, d: usize) -> Result<Self> {
        Self::new(Array2::ones((n, d)), Array2::zeros((n, d)))
    }

    /// Overrides the reported Lipschitz constant (must not be smaller than the
    /// true one for the theory to apply).
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }
}

impl FiniteSum for DiagonalQuadratic {
    fn dim(&self) -> usize {
        self.curvature.ncols()
    }

    fn num_components(&self) -> usize {
        self.curvature.nrows()
    }

    fn component_value(&self, i: usize, x: &Array1<f64>) -> f64 {
        let c = self.curvature.row(i);
        let l = self.linear.row(i);
        x.iter()
            .zip(c.iter().zip(l.iter()))
            .map(|(&x, (&c, &l))| 0.5 * c * x * x + l * x)
            .sum()
    }

    fn add_component_gradient(&self, i: usize, x: &Array1<f64>, scale: f64, out: &mut Array1<f64>) {
        let c = self.curvature.row(i);
        let l = self.linear.row(i);
        for j in 0..x.len() {
            out[j] += scale * (c[j] * x[j] + l[j]);
        }
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Least squares `f_i(x) = (a_i.x - b_i)^2 / 2`; each component gradient is
/// `||a_i||^2`-Lipschitz.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    a: Array2<f64>,
    b: Array1<f64>,
    lipschitz: f64,
}

impl LeastSquares {
    pub fn new(a: Array2<f64>, b: Array1<f64>) -> Result<Self> {
        if a.nrows() != b.len() || a.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "design {:?} vs targets {}",
                a.dim(),
                b.len()
            )));
        }
        let lipschitz = a.rows().into_iter().map(|r| r.dot(&r)).fold(0.0, f64::max);
        Ok(Self { a, b, lipschitz })
    }

    pub fn design(&self) -> &Array2<f64> {
        &self.a
    }

    pub fn targets(&self) -> &Array1<f64> {
        &self.b
    }

    fn gram_apply(&self, v: &Array1<f64>) -> Array1<f64> {
        self.a.t().dot(&self.a.dot(v)) / self.a.nrows() as f64
    }

    /// Extreme eigenvalues `(mu, L_f)` of `A^T A / n`. For a full-rank design
    /// `f` is `mu`-strongly convex, hence `1/(2 mu)`-gradient dominated.
    pub fn curvature_range(&self) -> (f64, f64) {
        let d = self.a.ncols();
        let top = top_eigenvalue(d, 2000, |v| self.gram_apply(v));
        let bottom = bottom_eigenvalue(d, 20000, top, |v| self.gram_apply(v));
        (bottom, top)
    }
}

impl FiniteSum for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn num_components(&self) -> usize {
        self.a.nrows()
    }

    fn component_value(&self, i: usize, x: &Array1<f64>) -> f64 {
        let r = self.a.row(i).dot(x) - self.b[i];
        0.5 * r * r
    }

    fn add_component_gradient(&self, i: usize, x: &Array1<f64>, scale: f64, out: &mut Array1<f64>) {
        let row = self.a.row(i);
        let r = row.dot(x) - self.b[i];
        out.scaled_add(scale * r, &row);
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn optimum_lower_bound(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// Sparse linear regression data: rows `a_i ~ N(0, I/d)`, a planted vector
/// with `support` nonzeros of magnitude `amplitude` and random sign, and
/// Gaussian noise of standard deviation `noise`.
///
/// With this row scaling `grad f(0) ~ -planted / d`, so an l1 penalty `lambda`
/// leaves the origin stationary unless `amplitude` exceeds about `lambda d`.
pub fn generate_sparse_regression(
    n: usize,
    d: usize,
    support: usize,
    amplitude: f64,
    noise: f64,
    seed: u64,
) -> Result<LeastSquares> {
    if n == 0 || d == 0 || support > d {
        return Err(Error::InvalidArgument(format!(
            "n = {n}, d = {d}, support = {support}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut planted = Array1::zeros(d);
    for j in sample(&mut rng, d, support) {
        planted[j] = if rng.random::<bool>() {
            amplitude
        } else {
            -amplitude
        };
    }
    let scale = 1.0 / (d as f64).sqrt();
    let a = Array2::from_shape_simple_fn((n, d), || scale * rng.sample::<f64, _>(StandardNormal));
    let clean = a.dot(&planted);
    let b = clean.mapv(|v| v + noise * rng.sample::<f64, _>(StandardNormal));
    LeastSquares::new(a, b)
}
