use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

use super::{Dynamics, EnvSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReacherParams {
    pub max_speed: f64,
    pub goal_radius: f64,
    pub annulus_inner: f64,
    pub annulus_outer: f64,
    pub workspace: f64,
    pub episode_length: f64,
}

impl Default for ReacherParams {
    fn default() -> Self {
        Self {
            max_speed: 0.5,
            goal_radius: 0.05,
            annulus_inner: 0.25,
            annulus_outer: 0.5,
            workspace: 1.0,
            episode_length: 8.0,
        }
    }
}

/// Planar point mass under velocity control with a sparse goal reward.
///
/// State `(x, y, gx, gy)`; the agent starts at the origin and the goal is
/// uniform (by area) in an annulus around it. Observation
/// `(x, y, gx − x, gy − y)`. Reward rate 1 inside the goal radius, 0 elsewhere.
#[derive(Clone, Debug)]
pub struct Reacher<T> {
    params: ReacherParams,
    spec: EnvSpec<T>,
}

impl<T: Real> Reacher<T> {
    pub fn new(params: ReacherParams) -> Self {
        let spec = EnvSpec {
            id: "reacher",
            state_dim: 4,
            observation_dim: 4,
            action_dim: 2,
            action_low: vec![T::lit(-params.max_speed); 2],
            action_high: vec![T::lit(params.max_speed); 2],
            episode_length: T::lit(params.episode_length),
            reward_bounds: (T::zero(), T::one()),
        };
        Self { params, spec }
    }

    pub fn params(&self) -> &ReacherParams {
        &self.params
    }
}

impl<T: Real> Dynamics<T> for Reacher<T> {
    fn spec(&self) -> &EnvSpec<T> {
        &self.spec
    }

    fn derivative(&self, _s: &[T], a: &[T], ds: &mut [T]) {
        ds[0] = a[0];
        ds[1] = a[1];
        ds[2] = T::zero();
        ds[3] = T::zero();
    }

    fn project(&self, s: &mut [T]) {
        let w = T::lit(self.params.workspace);
        s[0] = s[0].max(-w).min(w);
        s[1] = s[1].max(-w).min(w);
    }

    fn reward(&self, s: &[T], _a: &[T]) -> T {
        let dx = s[2] - s[0];
        let dy = s[3] - s[1];
        if (dx * dx + dy * dy).sqrt() <= T::lit(self.params.goal_radius) {
            T::one()
        } else {
            T::zero()
        }
    }

    fn initial_state(&self, rng: &mut dyn RngCore) -> Vec<T> {
        let (r0, r1) = (self.params.annulus_inner, self.params.annulus_outer);
        let u: f64 = rng.random();
        let r = (r0 * r0 + u * (r1 * r1 - r0 * r0)).sqrt();
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        vec![
            T::zero(),
            T::zero(),
            T::lit(r * phi.cos()),
            T::lit(r * phi.sin()),
        ]
    }

    fn observe(&self, s: &[T]) -> Vec<T> {
        vec![s[0], s[1], s[2] - s[0], s[3] - s[1]]
    }
}
