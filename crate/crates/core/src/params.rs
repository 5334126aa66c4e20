//! Parameter rules and feasibility constants from the convergence analysis.

/// `beta_1 = eta/2 - L eta^2/2 - eta^3 L^2 q / (2 |S2|)`; must be positive for
/// the smooth descent argument.
pub fn beta1(eta: f64, lipschitz: f64, q: usize, s2: usize) -> f64 {
    let l = lipschitz;
    eta / 2.0 - l * eta * eta / 2.0 - eta.powi(3) * l * l * q as f64 / (2.0 * s2 as f64)
}

/// `beta_2 = alpha eta - L eta^2/2 - eta/2 - eta^3 L^2 q / (2 |S2|)`; the
/// composite (and Bregman) counterpart of [`beta1`].
pub fn beta2(alpha: f64, eta: f64, lipschitz: f64, q: usize, s2: usize) -> f64 {
    let l = lipschitz;
    alpha * eta
        - l * eta * eta / 2.0
        - eta / 2.0
        - eta.powi(3) * l * l * q as f64 / (2.0 * s2 as f64)
}

/// Smallest admissible kernel modulus is strictly above this value.
pub const BREGMAN_ALPHA_GATE: f64 = 7.0 / 8.0;

/// `ceil(sqrt(n))`, computed exactly in integers.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r.max(1)
}

/// Finite-sum iteration budget
/// `K = 4 L gap / eps^2 * (alpha - 7/8)^-1 * (1 + 1/(4 alpha))`.
///
/// With `alpha = 1` this is `40 L gap / eps^2`, which is also what the smooth
/// bound gives at `eta = 1/(2L)`, `q = |S2|`.
pub fn finite_sum_iterations(lipschitz: f64, gap: f64, eps: f64, alpha: f64) -> usize {
    let k = 4.0 * lipschitz * gap / (eps * eps) / (alpha - BREGMAN_ALPHA_GATE)
        * (1.0 + 1.0 / (4.0 * alpha));
    (k.ceil() as usize).max(1)
}

/// Online iteration budget (twice the finite-sum constant).
pub fn online_iterations(lipschitz: f64, gap: f64, eps: f64, alpha: f64) -> usize {
    let k = 8.0 * lipschitz * gap / (eps * eps) / (alpha - BREGMAN_ALPHA_GATE)
        * (1.0 + 1.0 / (4.0 * alpha));
    (k.ceil() as usize).max(1)
}

/// Online anchor batch
/// `|S1| = 2 ((alpha - 7/8)^-1 (1 + 1/(4 alpha^2)) + 2/alpha^2) sigma^2 / eps^2`,
/// i.e. `24 sigma^2 / eps^2` for `alpha = 1`.
pub fn online_anchor_size(sigma_sq: f64, eps: f64, alpha: f64) -> usize {
    let c = 2.0
        * ((1.0 + 1.0 / (4.0 * alpha * alpha)) / (alpha - BREGMAN_ALPHA_GATE)
            + 2.0 / (alpha * alpha));
    ((c * sigma_sq / (eps * eps)).ceil() as usize).max(1)
}

/// Epoch length `ceil(c L tau)` for the gradient-dominated variant.
pub fn gd_epoch_length(lipschitz: f64, tau: f64, c: f64) -> usize {
    ((c * lipschitz * tau).ceil() as usize).max(3)
}

/// Per-epoch contraction factor `64 tau L / (q - 2)` of `E ||G_eta||^2`.
pub fn gd_contraction_factor(lipschitz: f64, tau: f64, q: usize) -> f64 {
    64.0 * tau * lipschitz / (q as f64 - 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_sqrt_exact() {
        assert_eq!(ceil_sqrt(1), 1);
        assert_eq!(ceil_sqrt(1000), 32);
        assert_eq!(ceil_sqrt(1024), 32);
        assert_eq!(ceil_sqrt(1025), 33);
        assert_eq!(ceil_sqrt(0), 1);
    }

    #[test]
    fn default_parameters_give_one_over_sixteen_l() {
        for l in [0.3, 1.0, 7.5] {
            let eta = 1.0 / (2.0 * l);
            assert!((beta1(eta, l, 32, 32) - 1.0 / (16.0 * l)).abs() <= 1e-15 / l);
            assert!((beta2(1.0, eta, l, 32, 32) - 1.0 / (16.0 * l)).abs() <= 1e-15 / l);
        }
    }

    #[test]
    fn budgets_reduce_to_unit_modulus_constants() {
        assert_eq!(online_anchor_size(1.0, 1.0, 1.0), 24);
        assert_eq!(finite_sum_iterations(1.0, 1.0, 1.0, 1.0), 40);
        assert_eq!(online_iterations(1.0, 1.0, 1.0, 1.0), 80);
    }
}
