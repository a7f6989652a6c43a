#![allow(dead_code)]

use ctco::envs::{Dynamics, Env, EnvSpec};
use rand::RngCore;

/// A single frozen state paying a constant reward rate, never terminating.
#[derive(Debug)]
pub struct ConstantReward {
    spec: EnvSpec<f64>,
    rate: f64,
}

impl ConstantReward {
    pub fn env(rate: f64, episode_length: f64) -> Env<f64> {
        Env::new(Self {
            spec: EnvSpec {
                id: "constant",
                state_dim: 1,
                observation_dim: 1,
                action_dim: 1,
                action_low: vec![-1.0],
                action_high: vec![1.0],
                episode_length,
                reward_bounds: (rate, rate),
            },
            rate,
        })
    }
}

impl Dynamics<f64> for ConstantReward {
    fn spec(&self) -> &EnvSpec<f64> {
        &self.spec
    }

    fn derivative(&self, _s: &[f64], _a: &[f64], ds: &mut [f64]) {
        ds[0] = 0.0;
    }

    fn reward(&self, _s: &[f64], _a: &[f64]) -> f64 {
        self.rate
    }

    fn initial_state(&self, _rng: &mut dyn RngCore) -> Vec<f64> {
        vec![0.0]
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
