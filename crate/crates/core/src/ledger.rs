//! Oracle accounting.
//!
//! One SFO unit is one evaluation of a single component gradient. A full
//! gradient over `n` components is billed `n` units (and additionally counted
//! as one full-gradient call). Anything evaluated only to *observe* a run
//! (true gradient norms, losses, `G_eta` checkpoints) goes to the diagnostic
//! counters so that the algorithm counters match the complexity formulas.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SfoLedger {
    /// Component gradients evaluated by the algorithm, per-index billing.
    pub component_gradient_evals: u64,
    /// Number of full-gradient calls (their `n` units are already included
    /// in `component_gradient_evals`).
    pub full_gradient_evals: u64,
    /// Proximal / Bregman subproblem solves performed by the algorithm.
    pub prox_calls: u64,
    /// Epoch-convention total: every anchor is billed its batch size and every
    /// iteration (anchor iterations included) is billed `|S2|`.
    pub epoch_convention_evals: u64,
    pub diagnostic_component_evals: u64,
    pub diagnostic_prox_calls: u64,
}

impl SfoLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge_components(&mut self, count: usize) {
        self.component_gradient_evals += count as u64;
    }

    pub fn charge_full_gradient(&mut self, n: usize) {
        self.component_gradient_evals += n as u64;
        self.full_gradient_evals += 1;
    }

    pub fn charge_prox(&mut self) {
        self.prox_calls += 1;
    }

    pub fn charge_epoch_convention(&mut self, units: usize) {
        self.epoch_convention_evals += units as u64;
    }

    pub fn charge_diagnostic(&mut self, count: usize) {
        self.diagnostic_component_evals += count as u64;
    }

    pub fn charge_diagnostic_prox(&mut self) {
        self.diagnostic_prox_calls += 1;
    }

    /// Algorithm SFO under per-index billing.
    pub fn sfo(&self) -> u64 {
        self.component_gradient_evals
    }
}

fn ceil_div(a: usize, b: usize) -> u64 {
    a.div_ceil(b) as u64
}

/// Per-index closed form for a finite-sum run of `iters` iterations with a
/// full-gradient anchor of `n` every `q` steps and inner batch `s2`:
/// `ceil(K/q) * n + 2 * (K - ceil(K/q)) * s2`.
pub fn per_index_closed_form(iters: usize, q: usize, anchor: usize, s2: usize) -> u64 {
    let anchors = ceil_div(iters, q);
    anchors * anchor as u64 + 2 * (iters as u64 - anchors) * s2 as u64
}

/// Epoch-convention closed form `ceil(K/q) * S1 + K * S2`.
pub fn epoch_closed_form(iters: usize, q: usize, anchor: usize, s2: usize) -> u64 {
    ceil_div(iters, q) * anchor as u64 + iters as u64 * s2 as u64
}
