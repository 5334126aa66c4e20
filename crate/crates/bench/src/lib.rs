//! Config-driven experiment harness for the `spider-vr` solvers.
//!
//! An experiment is one problem, a list of solvers and a list of seeds. Every
//! (solver, seed) cell writes a trace CSV and the experiment writes one
//! `summary.json`; see `CONFIG.md` for the file formats.

// `!(x > 0.0)` style checks are used on purpose: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod problems;
pub mod report;
pub mod run;

pub use config::{Algorithm, ExperimentConfig, ProblemSpec, SolverSpec, StartSpec};
pub use error::BenchError;
pub use report::{report_complexity, ComplexityReport};
pub use run::{run_experiment, run_experiment_in, CellStatus, CellSummary, ExperimentSummary};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/benchmark-harness.md")]
mod guide {}
