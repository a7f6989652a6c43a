//! Open-loop options: action trajectories `a(t) = φ(t/d)ᵀ ω` over a duration `d`.
//!
//! `φ` is a normalized radial basis over the phase `z = t/d ∈ [0, 1]`, so the
//! trajectory shape depends only on the phase and the weights. With a single
//! basis function the option is a constant action held for `d` seconds.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

/// Normalized Gaussian features on `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RbfBasis<T> {
    centers: Vec<T>,
    width: T,
}

/// Basis settings as they appear in a run config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BasisConfig {
    pub n_rbf: usize,
    /// Overrides the default width of `1 / n_rbf`.
    pub width: Option<f64>,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            n_rbf: 2,
            width: None,
        }
    }
}

impl<T: Real> RbfBasis<T> {
    /// `n_rbf` centers evenly spaced on `[0, 1]` (a single center sits at 0.5),
    /// width `1 / n_rbf`.
    pub fn new(n_rbf: usize) -> Result<Self> {
        let width = T::one() / T::lit(n_rbf.max(1) as f64);
        Self::with_width(n_rbf, width)
    }

    pub fn with_width(n_rbf: usize, width: T) -> Result<Self> {
        if n_rbf == 0 {
            return Err(Error::Config("n_rbf must be at least 1".into()));
        }
        if !(width > T::zero()) || !width.is_finite() {
            return Err(Error::Config(format!("RBF width must be positive, got {width}")));
        }
        let centers = if n_rbf == 1 {
            vec![T::lit(0.5)]
        } else {
            let step = T::one() / T::lit((n_rbf - 1) as f64);
            (0..n_rbf).map(|i| T::lit(i as f64) * step).collect()
        };
        Ok(Self { centers, width })
    }

    pub fn from_config(cfg: &BasisConfig) -> Result<Self> {
        match cfg.width {
            Some(w) => Self::with_width(cfg.n_rbf, T::lit(w)),
            None => Self::new(cfg.n_rbf),
        }
    }

    pub fn n_rbf(&self) -> usize {
        self.centers.len()
    }

    pub fn centers(&self) -> &[T] {
        &self.centers
    }

    pub fn width(&self) -> T {
        self.width
    }

    /// `φ(z)` with `z` clamped to `[0, 1]`.
    pub fn features(&self, z: T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.centers.len());
        self.features_into(z, &mut out);
        out
    }

    pub fn features_into(&self, z: T, out: &mut Vec<T>) {
        let z = z.max(T::zero()).min(T::one());
        let two_w2 = T::lit(2.0) * self.width * self.width;
        // shift by the nearest center's exponent; the ratio is unchanged
        let nearest = self
            .centers
            .iter()
            .map(|&c| (z - c) * (z - c))
            .fold(T::infinity(), T::min);
        out.clear();
        out.extend(
            self.centers
                .iter()
                .map(|&c| (-((z - c) * (z - c) - nearest) / two_w2).exp()),
        );
        let total: T = out.iter().copied().sum();
        out.iter_mut().for_each(|p| *p /= total);
    }

    /// Bound on `|da/dt|` for the unclamped trajectory of one action
    /// dimension with weights spanning `omega_range = max ω − min ω`.
    ///
    /// `da/dz = Cov_φ(u, ω)` with `u_i = −(z − c_i)/w²`; Popoviciu's inequality
    /// bounds that by `range(u)·range(ω)/4` and `range(u) ≤ (c_max − c_min)/w²`.
    pub fn lipschitz_bound(&self, omega_range: T, d: T) -> T {
        let first = self.centers[0];
        let last = self.centers[self.centers.len() - 1];
        let u_range = (last - first) / (self.width * self.width);
        u_range * omega_range / (T::lit(4.0) * d)
    }
}

/// An option: RBF weights (row `i` belongs to basis `i`, one column per
/// action dimension) and a duration in seconds.
#[derive(Clone, Debug, PartialEq)]
pub struct OptionChoice<T> {
    pub omega: Vec<T>,
    pub action_dim: usize,
    pub d: T,
}

impl<T: Real> OptionChoice<T> {
    pub fn new(omega: Vec<T>, action_dim: usize, d: T) -> Self {
        Self { omega, action_dim, d }
    }

    pub fn n_rbf(&self) -> usize {
        self.omega.len() / self.action_dim.max(1)
    }
}

/// Unclamped `φ(t/d)ᵀ ω`.
pub fn evaluate_raw<T: Real>(basis: &RbfBasis<T>, choice: &OptionChoice<T>, t: T) -> Result<Vec<T>> {
    check_dim(
        "option weights",
        basis.n_rbf() * choice.action_dim,
        choice.omega.len(),
    )?;
    if t < T::zero() || t > choice.d || !(choice.d > T::zero()) {
        return Err(Error::OptionTimeOutOfRange {
            t: t.as_f64(),
            d: choice.d.as_f64(),
        });
    }
    let phi = basis.features(t / choice.d);
    let mut a = vec![T::zero(); choice.action_dim];
    for (row, &p) in choice.omega.chunks_exact(choice.action_dim).zip(&phi) {
        for (ai, &w) in a.iter_mut().zip(row) {
            *ai += p * w;
        }
    }
    Ok(a)
}

/// Action at time `t ∈ [0, d]`, clamped to `[low, high]`.
pub fn evaluate<T: Real>(
    basis: &RbfBasis<T>,
    choice: &OptionChoice<T>,
    t: T,
    low: &[T],
    high: &[T],
) -> Result<Vec<T>> {
    let mut a = evaluate_raw(basis, choice, t)?;
    check_dim("action bounds", a.len(), low.len())?;
    check_dim("action bounds", a.len(), high.len())?;
    for ((x, &lo), &hi) in a.iter_mut().zip(low).zip(high) {
        *x = x.max(lo).min(hi);
    }
    Ok(a)
}
