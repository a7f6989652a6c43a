//! Gaussian policy over option weights and a sigmoid-squashed duration.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::diffnet::{Activation, NetSpec};
use crate::error::{check_dim, Result};
use crate::options::OptionChoice;
use crate::Net;

use super::dist::{clamp_log_sigma, normal_log_density, sigmoid, softplus};

/// Policy outputs for one state.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyHeads {
    pub mu_omega: Vec<f64>,
    /// Clamped to `[LOG_SIGMA_MIN, LOG_SIGMA_MAX]`.
    pub log_sigma_omega: Vec<f64>,
    pub mu_d: f64,
    pub log_sigma_d: f64,
    pub(crate) omega_unclamped: Vec<bool>,
    pub(crate) d_unclamped: bool,
}

/// Standard-normal draws behind one reparameterized sample.
#[derive(Clone, Debug, PartialEq)]
pub struct OptionNoise {
    pub eps_omega: Vec<f64>,
    pub eps_d: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptionSample {
    pub choice: OptionChoice<f64>,
    /// Pre-squash duration variable.
    pub x_d: f64,
    pub log_prob: f64,
    pub noise: OptionNoise,
}

/// Maps a state to a distribution over `(ω, d)`.
///
/// Output layout: `μ_ω` (`n_rbf · action_dim`), `log σ_ω` (same), `μ_d`, `log σ_d`.
/// `ω = μ_ω + ε σ_ω` and `d = d_min + (d_max − d_min)·sigmoid(μ_d + ε_d σ_d)`.
#[derive(Clone, Debug)]
pub struct OptionPolicy {
    pub net: Net,
    action_dim: usize,
    n_rbf: usize,
    d_min: f64,
    d_max: f64,
}

impl OptionPolicy {
    pub fn output_dim(n_rbf: usize, action_dim: usize) -> usize {
        2 * n_rbf * action_dim + 2
    }

    #[allow(clippy::too_many_arguments)]
    pub fn new<R: Rng + ?Sized>(
        obs_dim: usize,
        action_dim: usize,
        n_rbf: usize,
        d_min: f64,
        d_max: f64,
        hidden: Vec<usize>,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let spec = NetSpec::new(
            obs_dim,
            hidden,
            Self::output_dim(n_rbf, action_dim),
            activation,
        )?;
        Ok(Self {
            net: Net::new(spec, rng)?,
            action_dim,
            n_rbf,
            d_min,
            d_max,
        })
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn n_rbf(&self) -> usize {
        self.n_rbf
    }

    pub fn omega_dim(&self) -> usize {
        self.n_rbf * self.action_dim
    }

    pub fn duration_range(&self) -> (f64, f64) {
        (self.d_min, self.d_max)
    }

    /// `d_max − d_min`.
    pub fn duration_span(&self) -> f64 {
        self.d_max - self.d_min
    }

    /// A zero span makes the duration deterministic; it then carries no density.
    pub fn duration_is_random(&self) -> bool {
        self.duration_span() > 1e-12
    }

    pub fn heads_from_output(&self, out: &[f64]) -> PolicyHeads {
        let k = self.omega_dim();
        let (log_sigma_omega, omega_unclamped) =
            out[k..2 * k].iter().map(|&r| clamp_log_sigma(r)).unzip();
        let (log_sigma_d, d_unclamped) = clamp_log_sigma(out[2 * k + 1]);
        PolicyHeads {
            mu_omega: out[..k].to_vec(),
            log_sigma_omega,
            mu_d: out[2 * k],
            log_sigma_d,
            omega_unclamped,
            d_unclamped,
        }
    }

    pub fn heads(&self, obs: &[f64]) -> Result<PolicyHeads> {
        Ok(self.heads_from_output(&self.net.forward(obs)?))
    }

    pub fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> OptionNoise {
        OptionNoise {
            eps_omega: (0..self.omega_dim())
                .map(|_| rng.sample(StandardNormal))
                .collect(),
            eps_d: rng.sample(StandardNormal),
        }
    }

    pub fn duration_of(&self, x_d: f64) -> f64 {
        self.d_min + self.duration_span() * sigmoid(x_d)
    }

    /// `ln p(d)` for the squashed duration at pre-squash value `x_d`.
    pub fn duration_log_density(&self, mu_d: f64, log_sigma_d: f64, x_d: f64) -> f64 {
        let eps = (x_d - mu_d) / log_sigma_d.exp();
        normal_log_density(eps, log_sigma_d) - self.duration_span().ln()
            + softplus(-x_d)
            + softplus(x_d)
    }

    /// Sample and log-probability for given heads and noise.
    pub fn sample_from_heads(&self, heads: &PolicyHeads, noise: &OptionNoise) -> OptionSample {
        let omega: Vec<f64> = heads
            .mu_omega
            .iter()
            .zip(&heads.log_sigma_omega)
            .zip(&noise.eps_omega)
            .map(|((&mu, &ls), &e)| mu + e * ls.exp())
            .collect();
        let mut log_prob: f64 = heads
            .log_sigma_omega
            .iter()
            .zip(&noise.eps_omega)
            .map(|(&ls, &e)| normal_log_density(e, ls))
            .sum();
        let x_d = heads.mu_d + noise.eps_d * heads.log_sigma_d.exp();
        if self.duration_is_random() {
            // ln p(x_d) − ln|∂d/∂x_d|, with ln(s(1 − s)) = −softplus(−x) − softplus(x)
            log_prob += normal_log_density(noise.eps_d, heads.log_sigma_d)
                - self.duration_span().ln()
                + softplus(-x_d)
                + softplus(x_d);
        }
        OptionSample {
            choice: OptionChoice::new(omega, self.action_dim, self.duration_of(x_d)),
            x_d,
            log_prob,
            noise: noise.clone(),
        }
    }

    pub fn sample_with(&self, obs: &[f64], noise: &OptionNoise) -> Result<OptionSample> {
        check_dim("OptionNoise", self.omega_dim(), noise.eps_omega.len())?;
        Ok(self.sample_from_heads(&self.heads(obs)?, noise))
    }

    pub fn sample<R: Rng + ?Sized>(&self, obs: &[f64], rng: &mut R) -> Result<OptionSample> {
        let noise = self.draw_noise(rng);
        self.sample_with(obs, &noise)
    }

    /// Gradient of a loss with respect to the raw network outputs, given its
    /// gradient with respect to `ω`, the pre-squash `x_d`, and the clamped
    /// log-sigmas (direct dependence only).
    pub(crate) fn output_gradient(
        &self,
        heads: &PolicyHeads,
        noise: &OptionNoise,
        d_omega: &[f64],
        d_xd: f64,
        d_log_sigma_direct: f64,
        out: &mut Vec<f64>,
    ) {
        let k = self.omega_dim();
        out.clear();
        out.resize(2 * k + 2, 0.0);
        for i in 0..k {
            out[i] = d_omega[i];
            if heads.omega_unclamped[i] {
                let sigma = heads.log_sigma_omega[i].exp();
                out[k + i] = d_omega[i] * noise.eps_omega[i] * sigma + d_log_sigma_direct;
            }
        }
        if self.duration_is_random() {
            out[2 * k] = d_xd;
            if heads.d_unclamped {
                out[2 * k + 1] =
                    d_xd * noise.eps_d * heads.log_sigma_d.exp() + d_log_sigma_direct;
            }
        }
    }
}
