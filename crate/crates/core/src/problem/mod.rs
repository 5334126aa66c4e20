//! Objective oracles: finite sums of smooth components and online
//! (expectation) objectives, plus the concrete problem families used by the
//! solvers, tests and the benchmark harness.

mod dataset;
mod libsvm;
mod logistic;
mod online;
mod quadratic;

pub use dataset::{Dataset, Features, SparseRow};
pub use libsvm::{load_libsvm, parse_libsvm};
pub use logistic::{generate_synthetic_logistic, RegLogisticProblem};
pub use online::{generate_online_logistic, NoisyQuadratic, OnlineOracle, PooledOnline};
pub use quadratic::{generate_sparse_regression, DiagonalQuadratic, LeastSquares};

use ndarray::Array1;

use crate::error::{check_dim, Error, Result};
use crate::ledger::SfoLedger;

/// `f(x) = (1/n) sum_i f_i(x)` with every `grad f_i` `L`-Lipschitz.
///
/// Implementations are read-only after construction, so a problem can be
/// shared between solver runs on different threads.
pub trait FiniteSum: Sync {
    fn dim(&self) -> usize;

    fn num_components(&self) -> usize;

    fn component_value(&self, i: usize, x: &Array1<f64>) -> f64;

    /// `out += scale * grad f_i(x)`.
    fn add_component_gradient(&self, i: usize, x: &Array1<f64>, scale: f64, out: &mut Array1<f64>);

    /// Upper bound on the Lipschitz constant of every component gradient.
    fn lipschitz(&self) -> f64;

    /// A known lower bound on `inf f`, if any.
    fn optimum_lower_bound(&self) -> Option<f64> {
        None
    }

    fn value(&self, x: &Array1<f64>) -> f64 {
        let n = self.num_components();
        (0..n).map(|i| self.component_value(i, x)).sum::<f64>() / n as f64
    }

    fn component_gradient(&self, i: usize, x: &Array1<f64>) -> Array1<f64> {
        let mut g = Array1::zeros(self.dim());
        self.add_component_gradient(i, x, 1.0, &mut g);
        g
    }
}

/// Mean of the indexed component gradients, summed in the given order.
///
/// `full_gradient` goes through the same loop with `0..n`, which is what makes
/// the two bit-identical on the complete index set.
fn mean_gradient<P, I>(problem: &P, x: &Array1<f64>, indices: I) -> (Array1<f64>, usize)
where
    P: FiniteSum + ?Sized,
    I: IntoIterator<Item = usize>,
{
    let mut acc = Array1::zeros(problem.dim());
    let mut count = 0usize;
    for i in indices {
        problem.add_component_gradient(i, x, 1.0, &mut acc);
        count += 1;
    }
    acc /= count as f64;
    (acc, count)
}

/// `grad f(x)`; bills `n` SFO units.
pub fn full_gradient<P: FiniteSum + ?Sized>(
    problem: &P,
    x: &Array1<f64>,
    ledger: &mut SfoLedger,
) -> Result<Array1<f64>> {
    check_dim(problem.dim(), x.len())?;
    let n = problem.num_components();
    let (g, _) = mean_gradient(problem, x, 0..n);
    ledger.charge_full_gradient(n);
    Ok(g)
}

/// Full gradient evaluated for observation only (billed to the diagnostic
/// counter).
pub fn diagnostic_gradient<P: FiniteSum + ?Sized>(
    problem: &P,
    x: &Array1<f64>,
    ledger: &mut SfoLedger,
) -> Result<Array1<f64>> {
    check_dim(problem.dim(), x.len())?;
    let n = problem.num_components();
    let (g, _) = mean_gradient(problem, x, 0..n);
    ledger.charge_diagnostic(n);
    Ok(g)
}

/// Mean gradient over a multiset of component ids; bills `|indices|` units.
pub fn minibatch_gradient<P: FiniteSum + ?Sized>(
    problem: &P,
    x: &Array1<f64>,
    indices: &[usize],
    ledger: &mut SfoLedger,
) -> Result<Array1<f64>> {
    check_dim(problem.dim(), x.len())?;
    if indices.is_empty() {
        return Err(Error::InvalidArgument("empty index set".into()));
    }
    let n = problem.num_components();
    if let Some(&bad) = indices.iter().find(|&&i| i >= n) {
        return Err(Error::InvalidArgument(format!(
            "component id {bad} out of range for n = {n}"
        )));
    }
    let (g, count) = mean_gradient(problem, x, indices.iter().copied());
    ledger.charge_components(count);
    Ok(g)
}

/// Largest eigenvalue of a symmetric PSD operator by power iteration from the
/// all-ones vector (deterministic).
pub fn top_eigenvalue<F>(dim: usize, iters: usize, apply: F) -> f64
where
    F: Fn(&Array1<f64>) -> Array1<f64>,
{
    let mut v = Array1::from_elem(dim, 1.0 / (dim as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = apply(&v);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = v.dot(&w);
        v = w / norm;
    }
    lambda.max(v.dot(&apply(&v)))
}

/// Smallest eigenvalue of a symmetric PSD operator given an upper bound on its
/// spectrum, via power iteration on `upper * I - A`.
pub fn bottom_eigenvalue<F>(dim: usize, iters: usize, upper: f64, apply: F) -> f64
where
    F: Fn(&Array1<f64>) -> Array1<f64>,
{
    let shifted = top_eigenvalue(dim, iters, |v| upper * v - &apply(v));
    upper - shifted
}

/// Seeded starting point with i.i.d. `N(0, scale^2)` coordinates.
pub fn gaussian_start(dim: usize, scale: f64, seed: u64) -> Array1<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..dim)
        .map(|_| scale * rng.sample::<f64, _>(rand_distr::StandardNormal))
        .collect()
}
