use std::f64::consts::PI;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

use super::{Dynamics, EnvSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PendulumParams {
    pub gravity: f64,
    pub length: f64,
    pub mass: f64,
    pub max_torque: f64,
    pub max_speed: f64,
    pub episode_length: f64,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            length: 1.0,
            mass: 1.0,
            max_torque: 2.0,
            max_speed: 8.0,
            episode_length: 10.0,
        }
    }
}

/// Wraps an angle into `[-π, π)`.
pub fn angle_wrap<T: Real>(x: T) -> T {
    let pi = T::lit(PI);
    let two_pi = T::lit(2.0 * PI);
    x - two_pi * ((x + pi) / two_pi).floor()
}

/// Torque-limited pendulum swing-up.
///
/// `θ̈ = (g/ℓ)·sin θ + u/(mℓ²)` with `θ = 0` upright and `θ = π` hanging.
/// State `(θ, θ̇)`, observation `(cos θ, sin θ, θ̇)`. Reward
/// `−(wrap(θ)² + 0.1·θ̇² + 0.001·u²)`; angular speed saturates at `max_speed`.
#[derive(Clone, Debug)]
pub struct Pendulum<T> {
    params: PendulumParams,
    spec: EnvSpec<T>,
}

impl<T: Real> Pendulum<T> {
    pub fn new(params: PendulumParams) -> Self {
        let worst = PI * PI
            + 0.1 * params.max_speed * params.max_speed
            + 0.001 * params.max_torque * params.max_torque;
        let spec = EnvSpec {
            id: "pendulum",
            state_dim: 2,
            observation_dim: 3,
            action_dim: 1,
            action_low: vec![T::lit(-params.max_torque)],
            action_high: vec![T::lit(params.max_torque)],
            episode_length: T::lit(params.episode_length),
            reward_bounds: (T::lit(-worst), T::zero()),
        };
        Self { params, spec }
    }
}

impl<T: Real> Dynamics<T> for Pendulum<T> {
    fn spec(&self) -> &EnvSpec<T> {
        &self.spec
    }

    fn derivative(&self, s: &[T], a: &[T], ds: &mut [T]) {
        let p = &self.params;
        ds[0] = s[1];
        ds[1] = T::lit(p.gravity / p.length) * s[0].sin()
            + a[0] / T::lit(p.mass * p.length * p.length);
    }

    fn project(&self, s: &mut [T]) {
        let m = T::lit(self.params.max_speed);
        s[1] = s[1].max(-m).min(m);
    }

    fn reward(&self, s: &[T], a: &[T]) -> T {
        let th = angle_wrap(s[0]);
        -(th * th + T::lit(0.1) * s[1] * s[1] + T::lit(0.001) * a[0] * a[0])
    }

    fn initial_state(&self, rng: &mut dyn RngCore) -> Vec<T> {
        let th = rng.random_range(-PI..PI);
        let w = rng.random_range(-1.0..1.0);
        vec![T::lit(th), T::lit(w)]
    }

    fn observe(&self, s: &[T]) -> Vec<T> {
        vec![s[0].cos(), s[0].sin(), s[1]]
    }
}
