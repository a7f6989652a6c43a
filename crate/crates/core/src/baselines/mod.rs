//! Discrete-time comparison agents.
//!
//! [`sac`] makes one decision per control tick. [`arep_train`] is action
//! repetition: the option agent restricted to a single basis function
//! (constant actions) with durations rounded to whole ticks.

pub mod sac;

pub use sac::{sac_train, SacConfig, SacLearner, SacTransition, SquashedGaussianPolicy};

use crate::agent::{train, CtcoConfig, TrainReport};
use crate::envs::{ControlClock, Env};
use crate::error::Result;

/// The action-repetition reduction of an option config.
pub fn arep_config(base: &CtcoConfig) -> CtcoConfig {
    CtcoConfig {
        n_rbf: 1,
        rbf_width: None,
        quantize_duration: true,
        ..base.clone()
    }
}

/// Trains the action-repetition agent.
pub fn arep_train(
    cfg: &CtcoConfig,
    env: &Env<f64>,
    clock: &ControlClock<f64>,
    seed: u64,
    budget_task_seconds: f64,
) -> Result<TrainReport> {
    train(&arep_config(cfg), env, clock, seed, budget_task_seconds)
}
