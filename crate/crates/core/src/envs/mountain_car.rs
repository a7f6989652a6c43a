use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

use super::{Dynamics, EnvSpec};

/// Constants of the sparse continuous mountain car.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MountainCarParams {
    pub power: f64,
    /// Coefficient of `cos(3x)` in the acceleration (2.5 · 0.25).
    pub hill: f64,
    pub min_position: f64,
    pub max_position: f64,
    pub goal_position: f64,
    pub start_low: f64,
    pub start_high: f64,
    pub episode_length: f64,
    pub terminal_bonus: f64,
}

impl Default for MountainCarParams {
    fn default() -> Self {
        Self {
            power: 1.5,
            hill: 2.5 * 0.25,
            min_position: -1.2,
            max_position: 0.6,
            goal_position: 0.45,
            start_low: -0.6,
            start_high: -0.4,
            episode_length: 20.0,
            terminal_bonus: 1.0,
        }
    }
}

/// `ẋ = v`, `v̇ = power·a − hill·cos(3x)`; reaching the goal ends the episode.
///
/// State is `(x, v)`, action `a ∈ [−1, 1]`. The reward rate is 1 at or beyond
/// the goal and 0 elsewhere; the episode pays `terminal_bonus` once on arrival.
#[derive(Clone, Debug)]
pub struct MountainCar<T> {
    params: MountainCarParams,
    spec: EnvSpec<T>,
}

impl<T: Real> MountainCar<T> {
    pub fn new(params: MountainCarParams) -> Self {
        let spec = EnvSpec {
            id: "mountain_car",
            state_dim: 2,
            observation_dim: 2,
            action_dim: 1,
            action_low: vec![-T::one()],
            action_high: vec![T::one()],
            episode_length: T::lit(params.episode_length),
            reward_bounds: (T::zero(), T::one()),
        };
        Self { params, spec }
    }

    pub fn params(&self) -> &MountainCarParams {
        &self.params
    }
}

impl<T: Real> Dynamics<T> for MountainCar<T> {
    fn spec(&self) -> &EnvSpec<T> {
        &self.spec
    }

    fn derivative(&self, s: &[T], a: &[T], ds: &mut [T]) {
        ds[0] = s[1];
        ds[1] = T::lit(self.params.power) * a[0] - T::lit(self.params.hill) * (T::lit(3.0) * s[0]).cos();
    }

    fn project(&self, s: &mut [T]) {
        let lo = T::lit(self.params.min_position);
        let hi = T::lit(self.params.max_position);
        if s[0] < lo {
            s[0] = lo;
            s[1] = s[1].max(T::zero());
        } else if s[0] > hi {
            s[0] = hi;
            s[1] = s[1].min(T::zero());
        }
    }

    fn reward(&self, s: &[T], _a: &[T]) -> T {
        if self.is_terminal(s) {
            T::one()
        } else {
            T::zero()
        }
    }

    fn is_terminal(&self, s: &[T]) -> bool {
        s[0] >= T::lit(self.params.goal_position)
    }

    fn terminal_bonus(&self) -> T {
        T::lit(self.params.terminal_bonus)
    }

    fn initial_state(&self, rng: &mut dyn RngCore) -> Vec<T> {
        let x = rng.random_range(self.params.start_low..=self.params.start_high);
        vec![T::lit(x), T::zero()]
    }
}
