//! Problem instances built from a [`ProblemSpec`].

use ndarray::Array1;
use spider_vr::problem::{
    generate_online_logistic, generate_sparse_regression, generate_synthetic_logistic, load_libsvm,
    FiniteSum, LeastSquares, NoisyQuadratic, OnlineOracle, PooledOnline, RegLogisticProblem,
};
use spider_vr::Result;

use crate::config::ProblemSpec;

pub enum Instance {
    Logistic(RegLogisticProblem),
    LeastSquares(LeastSquares),
    OnlineLogistic(PooledOnline<RegLogisticProblem>),
    NoisyQuadratic(NoisyQuadratic),
}

impl Instance {
    pub fn build(spec: &ProblemSpec) -> Result<Self> {
        Ok(match spec {
            ProblemSpec::SyntheticLogistic {
                n,
                d,
                seed,
                alpha_reg,
            } => Instance::Logistic(generate_synthetic_logistic(*n, *d, *seed, *alpha_reg)?),
            ProblemSpec::Libsvm { path, alpha_reg } => {
                Instance::Logistic(RegLogisticProblem::new(load_libsvm(path)?, *alpha_reg)?)
            }
            ProblemSpec::SparseRegression {
                n,
                d,
                support,
                amplitude,
                noise,
                seed,
            } => Instance::LeastSquares(generate_sparse_regression(
                *n, *d, *support, *amplitude, *noise, *seed,
            )?),
            ProblemSpec::OnlineLogistic {
                pool_size,
                d,
                seed,
                alpha_reg,
            } => Instance::OnlineLogistic(generate_online_logistic(
                *pool_size, *d, *seed, *alpha_reg,
            )?),
            ProblemSpec::NoisyQuadratic {
                curvature,
                center,
                noise_std,
            } => Instance::NoisyQuadratic(NoisyQuadratic::new(
                Array1::from(curvature.clone()),
                Array1::from(center.clone()),
                *noise_std,
            )?),
        })
    }

    pub fn finite_sum(&self) -> Option<&dyn FiniteSum> {
        match self {
            Instance::Logistic(p) => Some(p),
            Instance::LeastSquares(p) => Some(p),
            _ => None,
        }
    }

    pub fn online(&self) -> Option<&dyn OnlineOracle> {
        match self {
            Instance::OnlineLogistic(o) => Some(o),
            Instance::NoisyQuadratic(o) => Some(o),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        match (self.finite_sum(), self.online()) {
            (Some(p), _) => p.dim(),
            (_, Some(o)) => o.dim(),
            _ => unreachable!(),
        }
    }

    /// Oracle calls per epoch: `n` for a finite sum, the pool size for a
    /// pooled online oracle, `None` for a continuous distribution.
    pub fn epoch_size(&self) -> Option<usize> {
        match self {
            Instance::Logistic(p) => Some(p.num_components()),
            Instance::LeastSquares(p) => Some(p.num_components()),
            Instance::OnlineLogistic(o) => Some(o.pool().num_components()),
            Instance::NoisyQuadratic(_) => None,
        }
    }
}
