//! Convex regularizers, their proximal maps, and the generalized gradient
//! `G_eta(x) = (x - prox_{eta h}(x - eta grad f(x))) / eta`.

use std::fmt;
use std::sync::Arc;

use ndarray::Array1;

use crate::error::{check_dim, Error, Result};
use crate::ledger::SfoLedger;
use crate::problem::{full_gradient, FiniteSum};

/// User-supplied convex regularizer with an exact proximal map.
pub trait CustomRegularizer: Send + Sync {
    fn name(&self) -> &str;
    fn value(&self, x: &Array1<f64>) -> f64;
    /// `argmin_u h(u) + ||u - x||^2 / (2 eta)`.
    fn prox(&self, x: &Array1<f64>, eta: f64) -> Array1<f64>;
}

#[derive(Clone)]
pub enum Regularizer {
    Zero,
    /// `lambda * ||x||_1`
    L1 {
        lambda: f64,
    },
    /// Indicator of the box `[lo, hi]^d`.
    Box {
        lo: f64,
        hi: f64,
    },
    Custom(Arc<dyn CustomRegularizer>),
}

impl fmt::Debug for Regularizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regularizer::Zero => write!(f, "Zero"),
            Regularizer::L1 { lambda } => write!(f, "L1 {{ lambda: {lambda} }}"),
            Regularizer::Box { lo, hi } => write!(f, "Box {{ lo: {lo}, hi: {hi} }}"),
            Regularizer::Custom(c) => write!(f, "Custom({})", c.name()),
        }
    }
}

impl Regularizer {
    pub fn l1(lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("l1 weight {lambda}")));
        }
        Ok(Regularizer::L1 { lambda })
    }

    pub fn boxed(lo: f64, hi: f64) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidArgument(format!("empty box [{lo}, {hi}]")));
        }
        Ok(Regularizer::Box { lo, hi })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Regularizer::Zero)
    }

    /// `h(x)`; `+inf` outside the box for the indicator.
    pub fn value(&self, x: &Array1<f64>) -> f64 {
        match self {
            Regularizer::Zero => 0.0,
            Regularizer::L1 { lambda } => lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            Regularizer::Box { lo, hi } => {
                if x.iter().all(|v| (*lo..=*hi).contains(v)) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Regularizer::Custom(c) => c.value(x),
        }
    }
}

pub fn soft_threshold(v: f64, threshold: f64) -> f64 {
    if v > threshold {
        v - threshold
    } else if v < -threshold {
        v + threshold
    } else {
        0.0
    }
}

/// `prox_{eta h}(x)`.
pub fn prox(reg: &Regularizer, x: &Array1<f64>, eta: f64) -> Result<Array1<f64>> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "prox parameter eta = {eta}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite prox input".into()));
    }
    Ok(match reg {
        Regularizer::Zero => x.clone(),
        Regularizer::L1 { lambda } => {
            let t = eta * lambda;
            x.mapv(|v| soft_threshold(v, t))
        }
        Regularizer::Box { lo, hi } => x.mapv(|v| v.clamp(*lo, *hi)),
        Regularizer::Custom(c) => c.prox(x, eta),
    })
}

/// `G_eta(x)` given the gradient at `x`. No oracle is billed.
///
/// For `h = 0` the prox is the identity and `G_eta(x)` is returned as the
/// gradient itself rather than `(x - (x - eta g)) / eta`, which would round.
pub fn generalized_gradient_from(
    reg: &Regularizer,
    x: &Array1<f64>,
    grad: &Array1<f64>,
    eta: f64,
) -> Result<Array1<f64>> {
    check_dim(x.len(), grad.len())?;
    if reg.is_zero() {
        if !(eta > 0.0) {
            return Err(Error::InvalidArgument(format!("eta = {eta}")));
        }
        return Ok(grad.clone());
    }
    let mut y = x.clone();
    y.scaled_add(-eta, grad);
    let p = prox(reg, &y, eta)?;
    Ok((x - &p) / eta)
}

/// `G_eta(x)`; bills `n` SFO units and one PO.
pub fn generalized_gradient<P: FiniteSum + ?Sized>(
    problem: &P,
    reg: &Regularizer,
    x: &Array1<f64>,
    eta: f64,
    ledger: &mut SfoLedger,
) -> Result<Array1<f64>> {
    let g = full_gradient(problem, x, ledger)?;
    let out = generalized_gradient_from(reg, x, &g, eta)?;
    ledger.charge_prox();
    Ok(out)
}
