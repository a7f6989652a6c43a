//! Scalar density helpers shared by the stochastic policies.

use std::f64::consts::PI;

pub const LOG_SIGMA_MIN: f64 = -10.0;
pub const LOG_SIGMA_MAX: f64 = 2.0;

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Log-density of `μ + εσ` under `N(μ, σ²)`, written in terms of `ε` and `ln σ`.
#[inline]
pub fn normal_log_density(eps: f64, log_sigma: f64) -> f64 {
    -0.5 * eps * eps - log_sigma - 0.5 * (2.0 * PI).ln()
}

/// Clamped log-sigma and whether the raw value was inside the clamp range
/// (the clamp passes gradient only in that case).
#[inline]
pub fn clamp_log_sigma(raw: f64) -> (f64, bool) {
    if raw < LOG_SIGMA_MIN {
        (LOG_SIGMA_MIN, false)
    } else if raw > LOG_SIGMA_MAX {
        (LOG_SIGMA_MAX, false)
    } else {
        (raw, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softplus_matches_definition() {
        for x in [-30.0, -2.0, 0.0, 1.5, 30.0] {
            assert!((softplus(x) - (1.0f64 + f64::exp(x)).ln()).abs() < 1e-12);
        }
        assert!(softplus(1000.0).is_finite());
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-16);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) <= 1.0);
    }
}
