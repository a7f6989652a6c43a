//! Continuous-time control tasks defined as ODEs `ṡ = f(s, a)`.
//!
//! Actions are applied with a zero-order hold for one control tick and the
//! plant is advanced with fourth-order Runge-Kutta on a micro-step no longer
//! than [`MAX_MICRO_STEP`]. The physics never depends on the control
//! frequency; a [`ControlClock`] only decides how often actions change.

mod mountain_car;
mod pendulum;
mod reacher;
pub mod rk4;

use std::fmt::Debug;
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

pub use mountain_car::{MountainCar, MountainCarParams};
pub use pendulum::{angle_wrap, Pendulum, PendulumParams};
pub use reacher::{Reacher, ReacherParams};

/// Upper bound on the RK4 integration step, in seconds.
pub const MAX_MICRO_STEP: f64 = 0.005;

/// Static description of a task.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpec<T> {
    pub id: &'static str,
    pub state_dim: usize,
    pub observation_dim: usize,
    pub action_dim: usize,
    pub action_low: Vec<T>,
    pub action_high: Vec<T>,
    /// Episode length `T` in seconds.
    pub episode_length: T,
    /// Declared `[r_min, r_max]` for the instantaneous reward.
    pub reward_bounds: (T, T),
}

impl<T: Real> EnvSpec<T> {
    pub fn clamp_action(&self, a: &[T], out: &mut Vec<T>) {
        out.clear();
        out.extend(
            a.iter()
                .zip(self.action_low.iter().zip(&self.action_high))
                .map(|(&x, (&lo, &hi))| x.max(lo).min(hi)),
        );
    }
}

/// The vector field, reward and start distribution of one task.
pub trait Dynamics<T: Real>: Debug + Send + Sync {
    fn spec(&self) -> &EnvSpec<T>;

    /// Writes `f(s, a)` into `ds`.
    fn derivative(&self, s: &[T], a: &[T], ds: &mut [T]);

    /// Projection onto admissible states (walls, speed limits) after each micro-step.
    fn project(&self, _s: &mut [T]) {}

    /// Instantaneous reward rate `r(s, a)`.
    fn reward(&self, s: &[T], a: &[T]) -> T;

    fn is_terminal(&self, _s: &[T]) -> bool {
        false
    }

    /// Lump-sum reward delivered once, at the instant a terminal state is reached.
    fn terminal_bonus(&self) -> T {
        T::zero()
    }

    fn initial_state(&self, rng: &mut dyn RngCore) -> Vec<T>;

    /// Features handed to the learner.
    fn observe(&self, s: &[T]) -> Vec<T> {
        s.to_vec()
    }
}

/// Control frequency and its tick length.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControlClock<T> {
    pub frequency_hz: T,
    pub dt: T,
}

impl<T: Real> ControlClock<T> {
    pub fn new(frequency_hz: T) -> Result<Self> {
        if !(frequency_hz > T::zero()) || !frequency_hz.is_finite() {
            return Err(Error::Config(format!(
                "control frequency must be positive, got {frequency_hz}"
            )));
        }
        Ok(Self {
            frequency_hz,
            dt: T::one() / frequency_hz,
        })
    }

    /// `floor(T · f)`, tolerant to rounding in the product.
    pub fn ticks_in(&self, seconds: T) -> usize {
        let n = (seconds * self.frequency_hz).as_f64();
        (n + 1e-9).floor().max(0.0) as usize
    }

    pub fn time_of(&self, tick: usize) -> T {
        T::lit(tick as f64) * self.dt
    }
}

/// Mutable episode state.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvState<T> {
    pub s: Vec<T>,
    /// Seconds elapsed since reset.
    pub t: T,
    pub tick: usize,
    /// Terminal state reached.
    pub done: bool,
    /// Time limit reached.
    pub truncated: bool,
}

impl<T: Real> EnvState<T> {
    pub fn is_over(&self) -> bool {
        self.done || self.truncated
    }
}

/// Outcome of one control tick.
#[derive(Clone, Debug, PartialEq)]
pub struct TickResult<T> {
    pub next: EnvState<T>,
    /// Reward rate at the tick start; contributes `reward · dt`.
    pub reward: T,
    /// Terminal lump sum, nonzero only on the tick that reaches a terminal state.
    pub bonus: T,
}

/// A task bound to shared physics.
#[derive(Clone, Debug)]
pub struct Env<T: Real> {
    dynamics: Arc<dyn Dynamics<T>>,
}

impl<T: Real> Env<T> {
    pub fn new(dynamics: impl Dynamics<T> + 'static) -> Self {
        Self {
            dynamics: Arc::new(dynamics),
        }
    }

    pub fn spec(&self) -> &EnvSpec<T> {
        self.dynamics.spec()
    }

    pub fn dynamics(&self) -> &dyn Dynamics<T> {
        self.dynamics.as_ref()
    }

    pub fn observe(&self, state: &EnvState<T>) -> Vec<T> {
        self.dynamics.observe(&state.s)
    }

    pub fn reset(&self, seed: u64) -> EnvState<T> {
        self.reset_with(&mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn reset_with(&self, rng: &mut dyn RngCore) -> EnvState<T> {
        self.state_at(self.dynamics.initial_state(rng))
    }

    /// Fresh episode state starting from `s`.
    pub fn state_at(&self, s: Vec<T>) -> EnvState<T> {
        EnvState {
            s,
            t: T::zero(),
            tick: 0,
            done: false,
            truncated: false,
        }
    }

    /// Holds `a` (clamped to bounds) for one tick of `clock`.
    pub fn tick(
        &self,
        state: &EnvState<T>,
        a: &[T],
        clock: &ControlClock<T>,
    ) -> Result<TickResult<T>> {
        if state.is_over() {
            return Err(Error::EpisodeFinished);
        }
        let spec = self.spec();
        check_dim("Env::tick action", spec.action_dim, a.len())?;
        check_dim("Env::tick state", spec.state_dim, state.s.len())?;
        let mut held = Vec::with_capacity(a.len());
        spec.clamp_action(a, &mut held);

        let reward = self.dynamics.reward(&state.s, &held);
        let mut s = state.s.clone();
        self.integrate(&mut s, &held, clock.dt);

        let tick = state.tick + 1;
        let done = self.dynamics.is_terminal(&s);
        let truncated = !done && tick >= clock.ticks_in(spec.episode_length);
        let bonus = if done {
            self.dynamics.terminal_bonus()
        } else {
            T::zero()
        };
        Ok(TickResult {
            next: EnvState {
                s,
                t: clock.time_of(tick),
                tick,
                done,
                truncated,
            },
            reward,
            bonus,
        })
    }

    /// Advances `s` by `duration` seconds with `a` held constant.
    pub fn integrate(&self, s: &mut [T], a: &[T], duration: T) {
        let steps = (duration.as_f64() / MAX_MICRO_STEP).ceil().max(1.0) as usize;
        let h = duration / T::lit(steps as f64);
        let mut scratch = rk4::Scratch::new(s.len());
        for _ in 0..steps {
            rk4::step(
                |x: &[T], dx: &mut [T]| self.dynamics.derivative(x, a, dx),
                s,
                h,
                &mut scratch,
            );
            self.dynamics.project(s);
        }
    }
}

/// The same physics bound to each control frequency.
pub fn frequency_variants<T: Real>(
    env: &Env<T>,
    freqs: &[T],
) -> Result<Vec<(Env<T>, ControlClock<T>)>> {
    freqs
        .iter()
        .map(|&f| Ok((env.clone(), ControlClock::new(f)?)))
        .collect()
}

/// Per-task constant overrides, as read from a run config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvOverrides {
    pub mountain_car: MountainCarParams,
    pub pendulum: PendulumParams,
    pub reacher: ReacherParams,
}

pub const ENV_IDS: [&str; 3] = ["mountain_car", "pendulum", "reacher"];

/// Builds a task from its string id.
pub fn make_env<T: Real>(id: &str, overrides: &EnvOverrides) -> Result<Env<T>> {
    match id {
        "mountain_car" => Ok(Env::new(MountainCar::new(overrides.mountain_car.clone()))),
        "pendulum" => Ok(Env::new(Pendulum::new(overrides.pendulum.clone()))),
        "reacher" => Ok(Env::new(Reacher::new(overrides.reacher.clone()))),
        other => Err(Error::Config(format!(
            "unknown env id {other:?}; expected one of {ENV_IDS:?}"
        ))),
    }
}
