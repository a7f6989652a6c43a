use crate::error::{Error, Result};
use crate::scalar::Real;

/// Continuous-time discounting `γ(d) = e^{−τ d}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscountSchedule<T> {
    pub tau: T,
}

impl<T: Real> DiscountSchedule<T> {
    pub fn new(tau: T) -> Result<Self> {
        if !(tau > T::zero()) || !tau.is_finite() {
            return Err(Error::Config(format!("discount rate must be positive, got {tau}")));
        }
        Ok(Self { tau })
    }

    /// The rate whose discount over `dt_base` seconds equals `gamma_base`.
    pub fn from_base(gamma_base: T, dt_base: T) -> Result<Self> {
        Self::new(-gamma_base.ln() / dt_base)
    }

    pub fn gamma(&self, d: T) -> Result<T> {
        if d < T::zero() {
            return Err(Error::NegativeDuration(d.as_f64()));
        }
        Ok((-self.tau * d).exp())
    }

    /// `γ(d)` for durations already known to be non-negative.
    #[inline]
    pub(crate) fn gamma_unchecked(&self, d: T) -> T {
        (-self.tau * d).exp()
    }
}

/// Discount rate matching `γ = 0.98` per 0.05 s.
pub fn default_tau() -> f64 {
    -(0.98f64.ln()) / 0.05
}
