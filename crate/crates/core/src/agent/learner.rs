//! Critic and actor updates of the option-level actor-critic.

use rand::Rng;

use crate::diffnet::{Adam, NetSpec, Tape};
use crate::error::Result;
use crate::Net;

use super::config::CtcoConfig;
use super::discount::DiscountSchedule;
use super::dist::sigmoid;
use super::policy::{OptionNoise, OptionPolicy};
use super::replay::ReplayBuffer;

/// One decision: state, chosen option, integrated reward, and where it led.
#[derive(Clone, Debug, PartialEq)]
pub struct SmdpTransition {
    /// Observation at the decision.
    pub s: Vec<f64>,
    pub omega: Vec<f64>,
    /// Sampled duration, as fed to the critic.
    pub d: f64,
    /// Integrated discounted reward over the executed ticks.
    pub reward: f64,
    /// Seconds actually executed; shorter than `d` when the episode ended.
    pub elapsed: f64,
    pub s_next: Vec<f64>,
    pub terminal: bool,
    pub truncated: bool,
}

/// `y = R − β_h + 1[¬terminal]·γ·(Q′ − β_E·ln p′)`.
pub fn bellman_target(
    reward: f64,
    beta_h: f64,
    terminal: bool,
    gamma: f64,
    q_next: f64,
    beta_e: f64,
    log_prob_next: f64,
) -> f64 {
    let bootstrap = if terminal {
        0.0
    } else {
        gamma * (q_next - beta_e * log_prob_next)
    };
    reward - beta_h + bootstrap
}

#[derive(Clone, Debug)]
pub struct Critic {
    pub net: Net,
    pub target: Net,
    opt: Adam<f64>,
}

impl Critic {
    fn new<R: Rng + ?Sized>(spec: NetSpec, lr: f64, rng: &mut R) -> Result<Self> {
        let net = Net::new(spec, rng)?;
        Ok(Self {
            target: net.clone(),
            net,
            opt: Adam::new(lr),
        })
    }
}

fn critic_input(obs: &[f64], omega: &[f64], d: f64, out: &mut Vec<f64>) {
    out.clear();
    out.extend_from_slice(obs);
    out.extend_from_slice(omega);
    out.push(d);
}

/// Policy, critics, their targets and optimizers.
#[derive(Clone, Debug)]
pub struct CtcoLearner {
    pub cfg: CtcoConfig,
    pub schedule: DiscountSchedule<f64>,
    pub policy: OptionPolicy,
    pub target_policy: OptionPolicy,
    pub critics: Vec<Critic>,
    actor_opt: Adam<f64>,
    obs_dim: usize,
}

impl CtcoLearner {
    pub fn new<R: Rng + ?Sized>(
        cfg: &CtcoConfig,
        obs_dim: usize,
        action_dim: usize,
        d_min: f64,
        d_max: f64,
        rng: &mut R,
    ) -> Result<Self> {
        cfg.validate()?;
        let policy = OptionPolicy::new(
            obs_dim,
            action_dim,
            cfg.n_rbf,
            d_min,
            d_max,
            cfg.actor_hidden.clone(),
            cfg.actor_activation,
            rng,
        )?;
        let critic_spec = NetSpec::new(
            obs_dim + cfg.n_rbf * action_dim + 1,
            cfg.critic_hidden.clone(),
            1,
            cfg.critic_activation,
        )?;
        let n_critics = if cfg.twin_critic { 2 } else { 1 };
        let critics = (0..n_critics)
            .map(|_| Critic::new(critic_spec.clone(), cfg.lr_critic, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            schedule: DiscountSchedule::new(cfg.tau)?,
            target_policy: policy.clone(),
            policy,
            critics,
            actor_opt: Adam::new(cfg.lr_actor),
            obs_dim,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    /// `Q(s, ω, d)`, the minimum over critics when twinned.
    pub fn q_value(&self, obs: &[f64], omega: &[f64], d: f64) -> Result<f64> {
        let mut x = Vec::new();
        critic_input(obs, omega, d, &mut x);
        let mut q = f64::INFINITY;
        for c in &self.critics {
            q = q.min(c.net.forward(&x)?[0]);
        }
        Ok(q)
    }

    fn target_q(&self, x: &[f64]) -> Result<f64> {
        let mut q = f64::INFINITY;
        for c in &self.critics {
            q = q.min(c.target.forward(x)?[0]);
        }
        Ok(q)
    }

    /// Bootstrapped regression target for one transition, sampling the next
    /// option from the target policy.
    pub fn critic_target<R: Rng + ?Sized>(&self, trans: &SmdpTransition, rng: &mut R) -> Result<f64> {
        let noise = self.target_policy.draw_noise(rng);
        self.critic_target_with(trans, &noise)
    }

    pub fn critic_target_with(&self, trans: &SmdpTransition, noise: &OptionNoise) -> Result<f64> {
        let gamma = self.schedule.gamma(trans.elapsed)?;
        if trans.terminal {
            return Ok(bellman_target(trans.reward, self.cfg.beta_h, true, gamma, 0.0, 0.0, 0.0));
        }
        let next = self.target_policy.sample_with(&trans.s_next, noise)?;
        let mut x = Vec::new();
        critic_input(&trans.s_next, &next.choice.omega, next.choice.d, &mut x);
        let q_next = self.target_q(&x)?;
        Ok(bellman_target(
            trans.reward,
            self.cfg.beta_h,
            false,
            gamma,
            q_next,
            self.cfg.beta_e,
            next.log_prob,
        ))
    }

    /// Mean squared Bellman error over `batch` for fixed targets.
    pub fn critic_loss(&self, batch: &[&SmdpTransition], targets: &[f64]) -> Result<f64> {
        let mut x = Vec::new();
        let mut total = 0.0;
        for (t, &y) in batch.iter().zip(targets) {
            critic_input(&t.s, &t.omega, t.d, &mut x);
            for c in &self.critics {
                let q = c.net.forward(&x)?[0];
                total += (q - y) * (q - y);
            }
        }
        Ok(total / batch.len() as f64)
    }

    /// One optimizer step on the critic(s). Returns the loss before the step.
    pub fn critic_step<R: Rng + ?Sized>(&mut self, batch: &[&SmdpTransition], rng: &mut R) -> Result<f64> {
        let targets = batch
            .iter()
            .map(|t| self.critic_target(t, rng))
            .collect::<Result<Vec<_>>>()?;
        self.critic_step_with_targets(batch, &targets)
    }

    pub fn critic_step_with_targets(&mut self, batch: &[&SmdpTransition], targets: &[f64]) -> Result<f64> {
        let scale = 2.0 / batch.len() as f64;
        let mut x = Vec::new();
        let mut tape = Tape::new();
        let mut gin = Vec::new();
        let mut loss = 0.0;
        for c in &mut self.critics {
            c.net.zero_grad();
            for (t, &y) in batch.iter().zip(targets) {
                critic_input(&t.s, &t.omega, t.d, &mut x);
                let q = c.net.forward_with(&x, &mut tape)?[0];
                loss += (q - y) * (q - y);
                c.net.accumulate(&mut tape, &[scale * (q - y)], &mut gin)?;
            }
            c.opt.step(&mut c.net);
        }
        Ok(loss / batch.len() as f64)
    }

    /// Surrogate actor loss `mean(−Q(s, ω, d) + β_E ln π(ω, d | s))` for fixed
    /// noise. Its gradient with respect to the policy parameters is written
    /// into the policy's gradient accumulator (replacing what was there).
    pub fn actor_loss_and_grad(&mut self, obs: &[&[f64]], noises: &[OptionNoise]) -> Result<f64> {
        let beta_e = self.cfg.beta_e;
        let scale = 1.0 / obs.len() as f64;
        let k = self.policy.omega_dim();
        let span = self.policy.duration_span();

        let mut actor_tape = Tape::new();
        let mut critic_tapes: Vec<Tape<f64>> = self.critics.iter().map(|_| Tape::new()).collect();
        let mut x = Vec::new();
        let mut q_grad_in = Vec::new();
        let mut d_omega = vec![0.0; k];
        let mut out_grad = Vec::new();
        let mut actor_gin = Vec::new();
        let mut loss = 0.0;

        self.policy.net.zero_grad();
        for (o, noise) in obs.iter().zip(noises) {
            let raw = self.policy.net.forward_with(o, &mut actor_tape)?.to_vec();
            let heads = self.policy.heads_from_output(&raw);
            let sample = self.policy.sample_from_heads(&heads, noise);
            critic_input(o, &sample.choice.omega, sample.choice.d, &mut x);

            let mut best = (f64::INFINITY, 0);
            for (i, (c, tape)) in self.critics.iter().zip(critic_tapes.iter_mut()).enumerate() {
                let q = c.net.forward_with(&x, tape)?[0];
                if q < best.0 {
                    best = (q, i);
                }
            }
            let (q, which) = best;
            loss += scale * (-q + beta_e * sample.log_prob);
            self.critics[which]
                .net
                .input_gradient(&mut critic_tapes[which], &[1.0], &mut q_grad_in)?;

            let n_obs = o.len();
            for i in 0..k {
                d_omega[i] = -scale * q_grad_in[n_obs + i];
            }
            let s = sigmoid(sample.x_d);
            let d_xd = if self.policy.duration_is_random() {
                -scale * q_grad_in[n_obs + k] * span * s * (1.0 - s)
                    + scale * beta_e * (2.0 * s - 1.0)
            } else {
                0.0
            };
            self.policy.output_gradient(
                &heads,
                noise,
                &d_omega,
                d_xd,
                -scale * beta_e,
                &mut out_grad,
            );
            self.policy
                .net
                .accumulate(&mut actor_tape, &out_grad, &mut actor_gin)?;
        }
        Ok(loss)
    }

    pub fn actor_step<R: Rng + ?Sized>(&mut self, obs: &[&[f64]], rng: &mut R) -> Result<f64> {
        let noises: Vec<OptionNoise> = obs.iter().map(|_| self.policy.draw_noise(rng)).collect();
        let loss = self.actor_loss_and_grad(obs, &noises)?;
        self.actor_opt.step(&mut self.policy.net);
        Ok(loss)
    }

    pub fn soft_update_targets(&mut self) -> Result<()> {
        let alpha = self.cfg.soft_alpha;
        for c in &mut self.critics {
            c.target.soft_update(&c.net, alpha)?;
        }
        self.target_policy.net.soft_update(&self.policy.net, alpha)
    }

    /// Critic step, actor step, then soft target updates on one sampled batch.
    pub fn update<R: Rng + ?Sized>(
        &mut self,
        buffer: &ReplayBuffer<SmdpTransition>,
        rng: &mut R,
    ) -> Result<UpdateStats> {
        let batch = buffer.sample(rng, self.cfg.batch_size);
        let critic_loss = self.critic_step(&batch, rng)?;
        let obs: Vec<&[f64]> = batch.iter().map(|t| t.s.as_slice()).collect();
        let actor_loss = self.actor_step(&obs, rng)?;
        self.soft_update_targets()?;
        Ok(UpdateStats {
            critic_loss,
            actor_loss,
        })
    }
}

/// Largest relative error between [`CtcoLearner::actor_loss_and_grad`] and
/// central differences of the same loss, for a random learner with a tanh
/// critic on `obs_dim`-dimensional states.
pub fn check_actor_gradient<R: Rng + ?Sized>(rng: &mut R, obs_dim: usize, h: f64) -> Result<f64> {
    let cfg = CtcoConfig {
        beta_e: 0.1,
        actor_hidden: vec![8, 8],
        critic_hidden: vec![16, 16],
        critic_activation: crate::diffnet::Activation::Tanh,
        ..CtcoConfig::default()
    };
    let mut learner = CtcoLearner::new(&cfg, obs_dim, 1, 0.05, 1.0, rng)?;
    let obs: Vec<Vec<f64>> = (0..8)
        .map(|_| (0..obs_dim).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let refs: Vec<&[f64]> = obs.iter().map(Vec::as_slice).collect();
    let noises: Vec<OptionNoise> = obs.iter().map(|_| learner.policy.draw_noise(rng)).collect();
    learner.actor_loss_and_grad(&refs, &noises)?;
    let analytic = learner.policy.net.grads().to_vec();
    let params = learner.policy.net.params().to_vec();
    let mut probe = learner.clone();
    let numeric = crate::diffnet::gradcheck::central_difference(&params, h, |p| {
        probe.policy.net.params_mut().copy_from_slice(p);
        probe
            .actor_loss_and_grad(&refs, &noises)
            .expect("dimensions fixed above")
    });
    Ok(crate::diffnet::gradcheck::max_relative_error(&analytic, &numeric, 1e-6))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpdateStats {
    pub critic_loss: f64,
    pub actor_loss: f64,
}
