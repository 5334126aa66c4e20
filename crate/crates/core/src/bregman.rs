//! Bregman geometry and the mirror (Bregman proximal) step
//!
//! `x+ = argmin_{u in X} h(u) + <v, u> + V(u, x) / eta`,
//!
//! for the two supported kernels: the (scaled) Euclidean kernel
//! `omega(x) = alpha ||x||^2 / 2` on all of `R^d`, and the (scaled) negative
//! entropy `omega(x) = alpha sum_i (x_i ln x_i - x_i)` on the probability
//! simplex, whose Bregman distance is `alpha` times the KL divergence.

use ndarray::Array1;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::ledger::SfoLedger;
use crate::prox::{prox, Regularizer};

const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    /// `R^d` with the squared Euclidean norm; strongly convex w.r.t. l2.
    Euclidean,
    /// Probability simplex with negative entropy; strongly convex w.r.t. l1.
    Entropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BregmanGeometry {
    pub kernel: Kernel,
    /// Strong-convexity modulus of the kernel (the kernel is scaled by it).
    pub alpha: f64,
}

impl Default for BregmanGeometry {
    fn default() -> Self {
        Self::euclidean()
    }
}

impl BregmanGeometry {
    pub fn euclidean() -> Self {
        Self {
            kernel: Kernel::Euclidean,
            alpha: 1.0,
        }
    }

    pub fn entropy_simplex() -> Self {
        Self {
            kernel: Kernel::Entropy,
            alpha: 1.0,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("kernel modulus {alpha}")));
        }
        self.alpha = alpha;
        Ok(self)
    }

    pub fn is_euclidean(&self) -> bool {
        self.kernel == Kernel::Euclidean
    }

    /// Membership in the constraint set (simplex within `1e-9`).
    pub fn contains(&self, x: &Array1<f64>) -> bool {
        match self.kernel {
            Kernel::Euclidean => x.iter().all(|v| v.is_finite()),
            Kernel::Entropy => {
                x.iter().all(|&v| v >= 0.0 && v.is_finite()) && (x.sum() - 1.0).abs() <= SIMPLEX_TOL
            }
        }
    }

    pub fn kernel_value(&self, x: &Array1<f64>) -> f64 {
        match self.kernel {
            Kernel::Euclidean => 0.5 * self.alpha * x.dot(x),
            Kernel::Entropy => {
                self.alpha
                    * x.iter()
                        .map(|&v| if v > 0.0 { v * v.ln() - v } else { -v })
                        .sum::<f64>()
            }
        }
    }

    /// Norm in which `alpha` is the strong-convexity modulus.
    pub fn modulus_norm(&self, x: &Array1<f64>) -> f64 {
        match self.kernel {
            Kernel::Euclidean => x.dot(x).sqrt(),
            Kernel::Entropy => x.iter().map(|v| v.abs()).sum(),
        }
    }

    /// `V(x, y) = omega(x) - omega(y) - <grad omega(y), x - y>`.
    pub fn distance(&self, x: &Array1<f64>, y: &Array1<f64>) -> Result<f64> {
        check_dim(x.len(), y.len())?;
        match self.kernel {
            Kernel::Euclidean => {
                let d = x - y;
                Ok(0.5 * self.alpha * d.dot(&d))
            }
            Kernel::Entropy => {
                if y.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain(
                        "entropy distance needs y in the simplex interior".into(),
                    ));
                }
                let kl: f64 = x
                    .iter()
                    .zip(y.iter())
                    .map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() + b - a } else { b })
                    .sum();
                Ok(self.alpha * kl)
            }
        }
    }
}

/// The mirror step; bills one PO.
///
/// With the Euclidean kernel this is exactly `prox_{t h}(x - t v)` with
/// `t = eta / alpha`, evaluated through [`prox`].
pub fn bregman_prox_step(
    geom: &BregmanGeometry,
    reg: &Regularizer,
    x: &Array1<f64>,
    v: &Array1<f64>,
    eta: f64,
    ledger: &mut SfoLedger,
) -> Result<Array1<f64>> {
    check_dim(x.len(), v.len())?;
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidArgument(format!("eta = {eta}")));
    }
    let t = eta / geom.alpha;
    let out = match geom.kernel {
        Kernel::Euclidean => {
            let mut y = x.clone();
            y.scaled_add(-t, v);
            prox(reg, &y, t)?
        }
        Kernel::Entropy => {
            // l1 is constant on the simplex, so it does not move the minimizer
            match reg {
                Regularizer::Zero | Regularizer::L1 { .. } => {}
                other => {
                    return Err(Error::Unsupported(format!(
                        "entropy kernel with regularizer {other:?}"
                    )))
                }
            }
            if !geom.contains(x) {
                return Err(Error::Domain("iterate is not in the simplex".into()));
            }
            if x.iter().any(|&xi| xi == 0.0) {
                return Err(Error::Domain(
                    "entropy step from a simplex boundary point".into(),
                ));
            }
            if v.iter().any(|vi| !vi.is_finite()) {
                return Err(Error::InvalidArgument("non-finite direction".into()));
            }
            let logits: Array1<f64> = x
                .iter()
                .zip(v.iter())
                .map(|(&xi, &vi)| xi.ln() - t * vi)
                .collect();
            let m = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            let w = logits.mapv(|l| (l - m).exp());
            let z = w.sum();
            w / z
        }
    };
    ledger.charge_prox();
    Ok(out)
}

/// `G_eta = (x - x+) / eta` induced by a mirror step.
pub fn step_generalized_gradient(x: &Array1<f64>, x_next: &Array1<f64>, eta: f64) -> Array1<f64> {
    (x - x_next) / eta
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn step(
        geom: &BregmanGeometry,
        reg: &Regularizer,
        x: &Array1<f64>,
        v: &Array1<f64>,
        eta: f64,
    ) -> Result<Array1<f64>> {
        bregman_prox_step(geom, reg, x, v, eta, &mut SfoLedger::new())
    }

    #[test]
    fn euclidean_without_regularizer_is_gradient_step() {
        let x = array![1.0, -2.0];
        let v = array![0.5, 0.25];
        let out = step(
            &BregmanGeometry::euclidean(),
            &Regularizer::Zero,
            &x,
            &v,
            0.2,
        )
        .unwrap();
        let mut expected = x.clone();
        expected.scaled_add(-0.2, &v);
        assert_eq!(out, expected);
    }

    #[test]
    fn euclidean_with_l1_matches_prox_bitwise() {
        let x = array![1.0, -2.0, 0.03];
        let v = array![0.5, -0.25, 0.1];
        let reg = Regularizer::l1(0.3).unwrap();
        let out = step(&BregmanGeometry::euclidean(), &reg, &x, &v, 0.7).unwrap();
        let direct = prox(&reg, &(&x - &(0.7 * &v)), 0.7).unwrap();
        assert_eq!(out, direct);
    }

    #[test]
    fn simplex_fixed_point_and_closed_form() {
        let geom = BregmanGeometry::entropy_simplex();
        let x = array![0.5, 0.5];
        assert_eq!(
            step(&geom, &Regularizer::Zero, &x, &array![0.0, 0.0], 1.0).unwrap(),
            x
        );

        let out = step(&geom, &Regularizer::Zero, &x, &array![1.0, 0.0], 1.0).unwrap();
        let e = (-1.0f64).exp();
        assert!((out[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((out[1] - 1.0 / (e + 1.0)).abs() < 1e-15);
        assert!((out[0] - 0.2689).abs() < 1e-4 && (out[1] - 0.7311).abs() < 1e-4);
    }

    #[test]
    fn simplex_closed_form_minimizes_mirror_objective() {
        // grid search over u = (s, 1 - s) of <v, u> + KL(u, x) / eta
        let geom = BregmanGeometry::entropy_simplex();
        let x = array![0.5, 0.5];
        let v = array![1.0, 0.0];
        let obj = |s: f64| {
            let u = array![s, 1.0 - s];
            v.dot(&u) + geom.distance(&u, &x).unwrap()
        };
        let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
        for _ in 0..200 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if obj(m1) < obj(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let out = step(&geom, &Regularizer::Zero, &x, &v, 1.0).unwrap();
        assert!((0.5 * (lo + hi) - out[0]).abs() < 1e-6);
    }

    #[test]
    fn entropy_errors() {
        let geom = BregmanGeometry::entropy_simplex();
        let v = array![1.0, 0.0];
        assert!(matches!(
            step(&geom, &Regularizer::Zero, &array![1.0, 0.0], &v, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            step(&geom, &Regularizer::Zero, &array![0.7, 0.7], &v, 1.0),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            step(
                &geom,
                &Regularizer::boxed(0.0, 1.0).unwrap(),
                &array![0.5, 0.5],
                &v,
                1.0
            ),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn euclidean_distance_and_modulus() {
        let g = BregmanGeometry::euclidean();
        let x = array![1.0, 2.0];
        let y = array![0.0, -1.0];
        assert_eq!(g.distance(&x, &y).unwrap(), 0.5 * 10.0);
        assert_eq!(g.distance(&x, &x).unwrap(), 0.0);
        // definition via the kernel
        let via_kernel = g.kernel_value(&x) - g.kernel_value(&y) - y.dot(&(&x - &y));
        assert!((via_kernel - 5.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn kl_is_strongly_convex_in_l1(
            a in proptest::collection::vec(0.01f64..1.0, 4),
            b in proptest::collection::vec(0.01f64..1.0, 4),
        ) {
            let g = BregmanGeometry::entropy_simplex();
            let x = Array1::from(a.clone()) / a.iter().sum::<f64>();
            let y = Array1::from(b.clone()) / b.iter().sum::<f64>();
            let v = g.distance(&x, &y).unwrap();
            prop_assert!(g.distance(&x, &x).unwrap().abs() < 1e-15);
            prop_assert!(v + 1e-12 >= 0.5 * g.alpha * g.modulus_norm(&(&x - &y)).powi(2));
        }

        #[test]
        fn simplex_step_stays_in_simplex(
            a in proptest::collection::vec(0.01f64..1.0, 5),
            v in proptest::collection::vec(-50.0f64..50.0, 5),
            eta in 0.01f64..3.0,
        ) {
            let g = BregmanGeometry::entropy_simplex();
            let x = Array1::from(a.clone()) / a.iter().sum::<f64>();
            let out = step(&g, &Regularizer::Zero, &x, &Array1::from(v), eta).unwrap();
            prop_assert!(out.iter().all(|&u| u >= 0.0));
            prop_assert!((out.sum() - 1.0).abs() <= 1e-12);
        }
    }
}
