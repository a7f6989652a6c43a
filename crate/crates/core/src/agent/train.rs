use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envs::{ControlClock, Env};
use crate::error::Result;
use crate::options::{OptionChoice, RbfBasis};

use super::config::CtcoConfig;
use super::execute::{execute_option, option_ticks};
use super::learner::{CtcoLearner, SmdpTransition};
use super::policy::OptionPolicy;
use super::replay::ReplayBuffer;

/// Per-episode metrics of a training run.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeStats {
    pub episode: usize,
    /// Task seconds since the run began, at episode end.
    pub task_time: f64,
    /// `Σ e^{−τ t_k} r_k dt` plus discounted terminal bonus, at control resolution.
    pub discounted_return: f64,
    pub decisions: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub episodes: Vec<EpisodeStats>,
    pub updates: u64,
    pub task_time: f64,
}

/// Tracks how many gradient updates the elapsed task time has paid for.
#[derive(Clone, Copy, Debug)]
pub(crate) struct UpdateBudget {
    per_second: f64,
    budget_seconds: f64,
    pub(crate) done: u64,
}

impl UpdateBudget {
    pub(crate) fn new(per_second: f64, budget_seconds: f64) -> Self {
        Self {
            per_second,
            budget_seconds,
            done: 0,
        }
    }

    pub(crate) fn total(&self) -> u64 {
        (self.budget_seconds * self.per_second + 1e-9).floor() as u64
    }

    /// Updates owed at `task_time` that have not run yet.
    pub(crate) fn owed(&self, task_time: f64) -> u64 {
        let t = task_time.min(self.budget_seconds);
        ((t * self.per_second + 1e-9).floor() as u64).saturating_sub(self.done)
    }
}

/// Accumulates the control-resolution discounted return of one episode.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct ReturnMeter {
    pub(crate) value: f64,
}

impl ReturnMeter {
    /// Adds one tick that started at episode tick `tick`.
    pub(crate) fn add_tick(&mut self, tau: f64, dt: f64, tick: usize, reward: f64, bonus: f64) {
        self.value += (-tau * tick as f64 * dt).exp() * reward * dt;
        if bonus != 0.0 {
            self.value += (-tau * (tick + 1) as f64 * dt).exp() * bonus;
        }
    }
}

/// Uniformly random option used before learning starts.
pub(crate) fn random_option<R: Rng + ?Sized>(
    env: &Env<f64>,
    n_rbf: usize,
    d_min: f64,
    d_max: f64,
    rng: &mut R,
) -> OptionChoice<f64> {
    let spec = env.spec();
    let mut omega = Vec::with_capacity(n_rbf * spec.action_dim);
    for _ in 0..n_rbf {
        for (lo, hi) in spec.action_low.iter().zip(&spec.action_high) {
            omega.push(rng.random_range(*lo..=*hi));
        }
    }
    let d = if d_max > d_min {
        rng.random_range(d_min..=d_max)
    } else {
        d_min
    };
    OptionChoice::new(omega, spec.action_dim, d)
}

fn basis_for(cfg: &CtcoConfig) -> Result<RbfBasis<f64>> {
    match cfg.rbf_width {
        Some(w) => RbfBasis::with_width(cfg.n_rbf, w),
        None => RbfBasis::new(cfg.n_rbf),
    }
}

/// Rounds `d` to a whole number of control ticks.
pub fn quantize_duration(d: f64, dt: f64) -> f64 {
    option_ticks(d, dt) as f64 * dt
}

/// Trains an option-level agent for `budget_task_seconds` of task time.
///
/// Each decision samples an option, executes it, stores the transition, and
/// then runs as many gradient updates as the elapsed task time allows at
/// `updates_per_task_second`. The first `warmup_ticks` ticks use random
/// options and defer the owed updates. Episodes still running when the
/// budget is exhausted are not reported.
pub fn train(
    cfg: &CtcoConfig,
    env: &Env<f64>,
    clock: &ControlClock<f64>,
    seed: u64,
    budget_task_seconds: f64,
) -> Result<TrainReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = env.spec().clone();
    let (d_min, d_max) = cfg.duration_range(clock.dt)?;
    let basis = basis_for(cfg)?;
    let mut learner = CtcoLearner::new(cfg, spec.observation_dim, spec.action_dim, d_min, d_max, &mut rng)?;
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let mut budget = UpdateBudget::new(cfg.updates_per_task_second, budget_task_seconds);

    let mut report = TrainReport {
        episodes: Vec::new(),
        updates: 0,
        task_time: 0.0,
    };
    let mut ticks_total: usize = 0;
    let mut state = env.reset_with(&mut rng);
    let mut meter = ReturnMeter::default();
    let mut decisions = 0;

    while report.task_time < budget_task_seconds {
        let obs = env.observe(&state);
        let warm = ticks_total < cfg.warmup_ticks;
        let mut choice = if warm {
            random_option(env, cfg.n_rbf, d_min, d_max, &mut rng)
        } else {
            learner.policy.sample(&obs, &mut rng)?.choice
        };
        let critic_d = choice.d;
        if cfg.quantize_duration {
            choice.d = quantize_duration(choice.d, clock.dt);
        }
        let out = execute_option(env, &state, &basis, &choice, clock, &learner.schedule)?;
        for (k, tr) in out.trace.iter().enumerate() {
            meter.add_tick(cfg.tau, clock.dt, state.tick + k, tr.reward, tr.bonus);
        }
        decisions += 1;
        ticks_total += out.ticks;
        report.task_time = ticks_total as f64 * clock.dt;

        buffer.push(SmdpTransition {
            s: obs,
            omega: choice.omega,
            d: critic_d,
            reward: out.reward,
            elapsed: out.elapsed,
            s_next: env.observe(&out.next),
            terminal: out.terminal,
            truncated: out.truncated,
        });

        if ticks_total >= cfg.warmup_ticks {
            for _ in 0..budget.owed(report.task_time) {
                learner.update(&buffer, &mut rng)?;
                budget.done += 1;
            }
        }

        if out.next.is_over() {
            report.episodes.push(EpisodeStats {
                episode: report.episodes.len(),
                task_time: report.task_time,
                discounted_return: meter.value,
                decisions,
            });
            state = env.reset_with(&mut rng);
            meter = ReturnMeter::default();
            decisions = 0;
        } else {
            state = out.next;
        }
    }
    // a warmup longer than the budget still owes its updates
    while budget.done < budget.total() && !buffer.is_empty() {
        learner.update(&buffer, &mut rng)?;
        budget.done += 1;
    }
    report.updates = budget.done;
    Ok(report)
}

/// Return of one episode under a policy that is never trained, for baselines.
pub fn evaluate_untrained(
    cfg: &CtcoConfig,
    env: &Env<f64>,
    clock: &ControlClock<f64>,
    seed: u64,
    episodes: usize,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = env.spec().clone();
    let (d_min, d_max) = cfg.duration_range(clock.dt)?;
    let basis = basis_for(cfg)?;
    let policy = OptionPolicy::new(
        spec.observation_dim,
        spec.action_dim,
        cfg.n_rbf,
        d_min,
        d_max,
        cfg.actor_hidden.clone(),
        cfg.actor_activation,
        &mut rng,
    )?;
    let schedule = super::discount::DiscountSchedule::new(cfg.tau)?;
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut state = env.reset_with(&mut rng);
        let mut meter = ReturnMeter::default();
        while !state.is_over() {
            let choice = policy.sample(&env.observe(&state), &mut rng)?.choice;
            let out = execute_option(env, &state, &basis, &choice, clock, &schedule)?;
            for (k, tr) in out.trace.iter().enumerate() {
                meter.add_tick(cfg.tau, clock.dt, state.tick + k, tr.reward, tr.bonus);
            }
            state = out.next;
        }
        returns.push(meter.value);
    }
    Ok(returns)
}
