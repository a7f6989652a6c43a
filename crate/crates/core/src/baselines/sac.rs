//! Per-tick soft actor-critic with a tanh-squashed Gaussian policy.
//!
//! Each control tick is one decision. The tick reward is `r·dt` (plus the
//! terminal bonus discounted over the tick) and the per-step discount is
//! `e^{−τ·dt}`, so returns stay on the same time scale at every frequency.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::agent::dist::{clamp_log_sigma, normal_log_density, softplus};
use crate::agent::train::{EpisodeStats, ReturnMeter, TrainReport, UpdateBudget};
use crate::agent::ReplayBuffer;
use crate::diffnet::{Activation, Adam, NetSpec, Tape};
use crate::envs::{ControlClock, Env};
use crate::error::{Error, Result};
use crate::Net;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SacConfig {
    pub gamma_base: f64,
    pub dt_base: f64,
    /// Entropy temperature.
    pub alpha: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub soft_alpha: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub updates_per_task_second: f64,
    pub warmup_ticks: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_hidden: Vec<usize>,
    pub actor_activation: Activation,
    pub critic_activation: Activation,
    pub twin_critic: bool,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            gamma_base: 0.98,
            dt_base: 0.05,
            alpha: 0.05,
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
        }
    }
}

impl SacConfig {
    /// `τ = −ln γ_base / dt_base`.
    pub fn tau(&self) -> f64 {
        -self.gamma_base.ln() / self.dt_base
    }

    /// Per-step discount at tick length `dt`.
    pub fn step_gamma(&self, dt: f64) -> f64 {
        (-self.tau() * dt).exp()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_base > 0.0 && self.gamma_base < 1.0) {
            return Err(Error::Config(format!(
                "gamma_base must lie in (0, 1), got {}",
                self.gamma_base
            )));
        }
        if !(self.dt_base > 0.0) || !(self.alpha >= 0.0) || !(self.updates_per_task_second > 0.0) {
            return Err(Error::Config("dt_base, alpha, updates_per_task_second out of range".into()));
        }
        if self.batch_size == 0 || self.buffer_capacity == 0 {
            return Err(Error::Config("batch_size and buffer_capacity must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SacTransition {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub reward: f64,
    pub s_next: Vec<f64>,
    pub terminal: bool,
}

/// `a = mid + half·tanh(μ + εσ)`.
#[derive(Clone, Debug)]
pub struct SquashedGaussianPolicy {
    pub net: Net,
    mid: Vec<f64>,
    half: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ActionSample {
    pub action: Vec<f64>,
    pub pre_squash: Vec<f64>,
    pub log_prob: f64,
}

impl SquashedGaussianPolicy {
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        low: &[f64],
        high: &[f64],
        hidden: Vec<usize>,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let spec = NetSpec::new(obs_dim, hidden, 2 * low.len(), activation)?;
        Ok(Self {
            net: Net::new(spec, rng)?,
            mid: low.iter().zip(high).map(|(l, h)| 0.5 * (l + h)).collect(),
            half: low.iter().zip(high).map(|(l, h)| 0.5 * (h - l)).collect(),
        })
    }

    pub fn action_dim(&self) -> usize {
        self.mid.len()
    }

    pub fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.action_dim()).map(|_| rng.sample(StandardNormal)).collect()
    }

    pub fn sample_from_output(&self, out: &[f64], eps: &[f64]) -> ActionSample {
        let n = self.action_dim();
        let mut action = Vec::with_capacity(n);
        let mut pre_squash = Vec::with_capacity(n);
        let mut log_prob = 0.0;
        for j in 0..n {
            let (ls, _) = clamp_log_sigma(out[n + j]);
            let u = out[j] + eps[j] * ls.exp();
            // ln(1 − tanh²u) = 2(ln 2 − u − softplus(−2u))
            let log_det = 2.0 * (std::f64::consts::LN_2 - u - softplus(-2.0 * u));
            log_prob += normal_log_density(eps[j], ls) - self.half[j].ln() - log_det;
            action.push(self.mid[j] + self.half[j] * u.tanh());
            pre_squash.push(u);
        }
        ActionSample {
            action,
            pre_squash,
            log_prob,
        }
    }

    pub fn sample_with(&self, obs: &[f64], eps: &[f64]) -> Result<ActionSample> {
        Ok(self.sample_from_output(&self.net.forward(obs)?, eps))
    }

    pub fn sample<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<ActionSample> {
        let eps = self.draw_noise(rng);
        self.sample_with(obs, &eps)
    }
}

#[derive(Clone, Debug)]
struct QNet {
    net: Net,
    target: Net,
    opt: Adam<f64>,
}

fn critic_input(obs: &[f64], a: &[f64], out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(obs);
    out.extend_from_slice(a);
}

/// Soft actor-critic learner state.
#[derive(Clone, Debug)]
pub struct SacLearner {
    pub cfg: SacConfig,
    pub policy: SquashedGaussianPolicy,
    critics: Vec<QNet>,
    actor_opt: Adam<f64>,
    gamma: f64,
}

impl SacLearner {
    pub fn new<R: Rng + ?Sized>(
        cfg: &SacConfig,
        obs_dim: usize,
        low: &[f64],
        high: &[f64],
        dt: f64,
        rng: &mut R,
    ) -> Result<Self> {
        cfg.validate()?;
        let policy = SquashedGaussianPolicy::new(
            obs_dim,
            low,
            high,
            cfg.actor_hidden.clone(),
            cfg.actor_activation,
            rng,
        )?;
        let spec = NetSpec::new(obs_dim + low.len(), cfg.critic_hidden.clone(), 1, cfg.critic_activation)?;
        let n = if cfg.twin_critic { 2 } else { 1 };
        let critics = (0..n)
            .map(|_| {
                let net = Net::new(spec.clone(), rng)?;
                Ok(QNet {
                    target: net.clone(),
                    net,
                    opt: Adam::new(cfg.lr_critic),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            policy,
            critics,
            actor_opt: Adam::new(cfg.lr_actor),
            gamma: cfg.step_gamma(dt),
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn critic_nets(&self) -> impl Iterator<Item = &Net> {
        self.critics.iter().map(|c| &c.net)
    }

    fn critic_step<R: Rng + ?Sized>(&mut self, batch: &[&SacTransition], rng: &mut R) -> Result<f64> {
        let mut x = Vec::new();
        let mut targets = Vec::with_capacity(batch.len());
        for t in batch {
            let y = if t.terminal {
                t.reward
            } else {
                let next = self.policy.sample(&t.s_next, rng)?;
                critic_input(&t.s_next, &next.action, &mut x);
                let mut q = f64::INFINITY;
                for c in &self.critics {
                    q = q.min(c.target.forward(&x)?[0]);
                }
                t.reward + self.gamma * (q - self.cfg.alpha * next.log_prob)
            };
            targets.push(y);
        }
        let scale = 2.0 / batch.len() as f64;
        let mut tape = Tape::new();
        let mut gin = Vec::new();
        let mut loss = 0.0;
        for c in &mut self.critics {
            c.net.zero_grad();
            for (t, &y) in batch.iter().zip(&targets) {
                critic_input(&t.s, &t.a, &mut x);
                let q = c.net.forward_with(&x, &mut tape)?[0];
                loss += (q - y) * (q - y);
                c.net.accumulate(&mut tape, &[scale * (q - y)], &mut gin)?;
            }
            c.opt.step(&mut c.net);
        }
        Ok(loss / batch.len() as f64)
    }

    /// `mean(−Q(s, a) + α ln π(a | s))` for fixed noise; gradient written into
    /// the policy's accumulator.
    pub fn actor_loss_and_grad(&mut self, obs: &[&[f64]], noises: &[Vec<f64>]) -> Result<f64> {
        let n = self.policy.action_dim();
        let scale = 1.0 / obs.len() as f64;
        let alpha = self.cfg.alpha;
        let mut actor_tape = Tape::new();
        let mut tapes: Vec<Tape<f64>> = self.critics.iter().map(|_| Tape::new()).collect();
        let mut x = Vec::new();
        let mut q_in = Vec::new();
        let mut out_grad = vec![0.0; 2 * n];
        let mut gin = Vec::new();
        let mut loss = 0.0;
        self.policy.net.zero_grad();
        for (o, eps) in obs.iter().zip(noises) {
            let raw = self.policy.net.forward_with(o, &mut actor_tape)?.to_vec();
            let s = self.policy.sample_from_output(&raw, eps);
            critic_input(o, &s.action, &mut x);
            let mut best = (f64::INFINITY, 0);
            for (i, (c, tape)) in self.critics.iter().zip(tapes.iter_mut()).enumerate() {
                let q = c.net.forward_with(&x, tape)?[0];
                if q < best.0 {
                    best = (q, i);
                }
            }
            loss += scale * (-best.0 + alpha * s.log_prob);
            self.critics[best.1]
                .net
                .input_gradient(&mut tapes[best.1], &[1.0], &mut q_in)?;
            for j in 0..n {
                let th = s.pre_squash[j].tanh();
                let du = -scale * q_in[o.len() + j] * self.policy.half[j] * (1.0 - th * th)
                    + scale * alpha * 2.0 * th;
                out_grad[j] = du;
                let (ls, inside) = clamp_log_sigma(raw[n + j]);
                out_grad[n + j] = if inside {
                    du * eps[j] * ls.exp() - scale * alpha
                } else {
                    0.0
                };
            }
            self.policy.net.accumulate(&mut actor_tape, &out_grad, &mut gin)?;
        }
        Ok(loss)
    }

    pub fn update<R: Rng + ?Sized>(&mut self, buffer: &ReplayBuffer<SacTransition>, rng: &mut R) -> Result<()> {
        let batch = buffer.sample(rng, self.cfg.batch_size);
        self.critic_step(&batch, rng)?;
        let obs: Vec<&[f64]> = batch.iter().map(|t| t.s.as_slice()).collect();
        let noises: Vec<Vec<f64>> = obs.iter().map(|_| self.policy.draw_noise(rng)).collect();
        self.actor_loss_and_grad(&obs, &noises)?;
        self.actor_opt.step(&mut self.policy.net);
        let a = self.cfg.soft_alpha;
        for c in &mut self.critics {
            c.target.soft_update(&c.net, a)?;
        }
        Ok(())
    }
}

/// Trains per-tick SAC for `budget_task_seconds` of task time.
pub fn sac_train(
    cfg: &SacConfig,
    env: &Env<f64>,
    clock: &ControlClock<f64>,
    seed: u64,
    budget_task_seconds: f64,
) -> Result<TrainReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spec = env.spec().clone();
    let mut learner = SacLearner::new(
        cfg,
        spec.observation_dim,
        &spec.action_low,
        &spec.action_high,
        clock.dt,
        &mut rng,
    )?;
    let tau = cfg.tau();
    let step_gamma = learner.gamma();
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
        let action = if ticks_total < cfg.warmup_ticks {
            spec.action_low
                .iter()
                .zip(&spec.action_high)
                .map(|(&lo, &hi)| rng.random_range(lo..=hi))
                .collect()
        } else {
            learner.policy.sample(&obs, &mut rng)?.action
        };
        let step = env.tick(&state, &action, clock)?;
        meter.add_tick(tau, clock.dt, state.tick, step.reward, step.bonus);
        decisions += 1;
        ticks_total += 1;
        report.task_time = ticks_total as f64 * clock.dt;
        buffer.push(SacTransition {
            s: obs,
            a: action,
            reward: step.reward * clock.dt + step_gamma * step.bonus,
            s_next: env.observe(&step.next),
            terminal: step.next.done,
        });

        if ticks_total >= cfg.warmup_ticks {
            for _ in 0..budget.owed(report.task_time) {
                learner.update(&buffer, &mut rng)?;
                budget.done += 1;
            }
        }

        if step.next.is_over() {
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
            state = step.next;
        }
    }
    while budget.done < budget.total() && !buffer.is_empty() {
        learner.update(&buffer, &mut rng)?;
        budget.done += 1;
    }
    report.updates = budget.done;
    Ok(report)
}
