//! Variance-reduced stochastic optimizers built on the recursive gradient
//! estimator `v_k = v_{k-1} + mean_i (grad f_i(x_k) - grad f_i(x_{k-1}))`.
//!
//! Smooth finite sums: [`run_sarah`], [`run_spider`], [`run_spiderboost`].
//! Composite objectives `f + h`: [`run_prox_spiderboost`],
//! [`run_prox_spiderboost_gd`] and the online [`run_prox_spiderboost_o`], with
//! Euclidean or entropy mirror steps.
//!
//! Every solver bills its oracle calls to an [`SfoLedger`].
//!
//! ```
//! use spider_vr::{generate_synthetic_logistic, run_spiderboost, SmoothSolverConfig};
//!
//! let problem = generate_synthetic_logistic(200, 10, 7, 0.1).unwrap();
//! let mut cfg = SmoothSolverConfig::new(1e-2, 0);
//! cfg.max_iters = Some(100);
//! let out = run_spiderboost(&problem, &cfg).unwrap();
//! assert_eq!(out.trace.params.q, 15);
//! assert_eq!(out.trace.ledger.full_gradient_evals, 7);
//! ```

// `!(x > 0.0)` style checks are used on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bregman;
pub mod composite;
pub mod error;
pub mod estimator;
pub mod ledger;
pub mod params;
pub mod problem;
pub mod prox;
pub mod smooth;
pub mod trace;

pub use bregman::{bregman_prox_step, BregmanGeometry, Kernel};
pub use composite::{
    check_gradient_dominance, reference_optimum, run_composite, run_prox_spiderboost,
    run_prox_spiderboost_gd, run_prox_spiderboost_o, CompositeAlgorithm, CompositeSolverConfig,
    DominanceReport,
};
pub use error::{Error, Result};
pub use estimator::{
    sample_mean_gradient, variance_gap_estimate, GradientSource, OnlineSource, SamplingMode,
    SpiderEstimator, VarianceGapReport, VarianceProbeConfig,
};
pub use ledger::SfoLedger;
pub use problem::{
    full_gradient, gaussian_start, generate_online_logistic, generate_sparse_regression,
    generate_synthetic_logistic, load_libsvm, Dataset, DiagonalQuadratic, FiniteSum, LeastSquares,
    NoisyQuadratic, OnlineOracle, PooledOnline, RegLogisticProblem,
};
pub use prox::{generalized_gradient, prox, Regularizer};
pub use smooth::{
    run_sarah, run_smooth, run_spider, run_spiderboost, OutputRule, SmoothAlgorithm,
    SmoothSolverConfig,
};
pub use trace::{ResolvedParams, RunTrace, SolverOutput, TraceOptions, TraceRecord};

// Guide chapters, compiled and run as doctests.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/estimator.md")]
    mod estimator {}
    #[doc = include_str!("../../../book/src/smooth-solvers.md")]
    mod smooth_solvers {}
    #[doc = include_str!("../../../book/src/proximal-geometry.md")]
    mod proximal_geometry {}
    #[doc = include_str!("../../../book/src/composite-solvers.md")]
    mod composite_solvers {}
    #[doc = include_str!("../../../book/src/oracle-accounting.md")]
    mod oracle_accounting {}
}
