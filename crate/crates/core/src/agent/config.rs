use serde::{Deserialize, Serialize};

use crate::diffnet::Activation;
use crate::error::{Error, Result};

use super::discount::default_tau;

/// Hyperparameters of the option-level actor-critic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CtcoConfig {
    /// Continuous-time discount rate `τ` (1/s).
    pub tau: f64,
    /// Entropy coefficient `β_E`.
    pub beta_e: f64,
    /// Per-decision penalty `β_h`.
    pub beta_h: f64,
    /// Shortest option in seconds; `None` means one control tick.
    pub d_min: Option<f64>,
    pub d_max: f64,
    pub n_rbf: usize,
    /// RBF width; `None` means `1 / n_rbf`.
    pub rbf_width: Option<f64>,
    pub lr_actor: f64,
    pub lr_critic: f64,
    /// Soft-update rate `α_χ` for the target actor and critic.
    pub soft_alpha: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub updates_per_task_second: f64,
    /// Control ticks of uniformly random options before learning starts.
    pub warmup_ticks: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_activation: Activation,
    pub critic_activation: Activation,
    /// Use the minimum of two critics in targets and actor loss.
    pub twin_critic: bool,
    /// Round sampled durations to whole control ticks before execution.
    pub quantize_duration: bool,
}

impl Default for CtcoConfig {
    fn default() -> Self {
        Self {
            tau: default_tau(),
            beta_e: 0.05,
            beta_h: 0.01,
            d_min: None,
            d_max: 1.0,
            n_rbf: 2,
            rbf_width: None,
            lr_actor: 3e-4,
            lr_critic: 3e-4,
            soft_alpha: 0.005,
            batch_size: 256,
            buffer_capacity: 100_000,
            updates_per_task_second: 20.0,
            warmup_ticks: 1000,
            actor_hidden: vec![10, 10],
            critic_hidden: vec![64, 64],
            actor_activation: Activation::Tanh,
            critic_activation: Activation::Relu,
            twin_critic: false,
            quantize_duration: false,
        }
    }
}

impl CtcoConfig {
    /// Checks the invariants that do not depend on the control clock.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau", self.tau),
            ("d_max", self.d_max),
            ("lr_actor", self.lr_actor),
            ("lr_critic", self.lr_critic),
            ("soft_alpha", self.soft_alpha),
            ("updates_per_task_second", self.updates_per_task_second),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("beta_e", self.beta_e), ("beta_h", self.beta_h)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.soft_alpha > 1.0 {
            return Err(Error::Config("soft_alpha must lie in (0, 1]".into()));
        }
        if self.n_rbf == 0 || self.batch_size == 0 || self.buffer_capacity == 0 {
            return Err(Error::Config(
                "n_rbf, batch_size and buffer_capacity must be positive".into(),
            ));
        }
        Ok(())
    }

    /// `(d_min, d_max)` for a control tick of `dt` seconds.
    pub fn duration_range(&self, dt: f64) -> Result<(f64, f64)> {
        let d_min = self.d_min.unwrap_or(dt);
        if d_min < dt * (1.0 - 1e-9) {
            return Err(Error::Config(format!(
                "d_min {d_min} is shorter than one control tick {dt}"
            )));
        }
        if self.d_max < d_min * (1.0 - 1e-9) {
            return Err(Error::Config(format!(
                "d_max {} is shorter than d_min {d_min}",
                self.d_max
            )));
        }
        Ok((d_min, self.d_max.max(d_min)))
    }
}
