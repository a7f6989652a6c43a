use crate::envs::{ControlClock, Env, EnvState};
use crate::error::Result;
use crate::options::{evaluate, OptionChoice, RbfBasis};

use super::discount::DiscountSchedule;

/// One executed control tick of an option.
#[derive(Clone, Debug, PartialEq)]
pub struct TickTrace {
    pub action: Vec<f64>,
    pub reward: f64,
    pub bonus: f64,
}

#[derive(Clone, Debug)]
pub struct OptionOutcome {
    /// `Σ_k e^{−τ k dt} r_k dt` plus the discounted terminal bonus.
    pub reward: f64,
    pub next: EnvState<f64>,
    pub elapsed: f64,
    pub ticks: usize,
    pub terminal: bool,
    pub truncated: bool,
    pub trace: Vec<TickTrace>,
}

/// Number of control ticks an option of `d` seconds runs for.
pub fn option_ticks(d: f64, dt: f64) -> usize {
    ((d / dt).round() as usize).max(1)
}

/// Runs an option open-loop from `state` with a left-Riemann reward integral.
///
/// Stops early when the episode terminates or hits its time limit.
pub fn execute_option(
    env: &Env<f64>,
    state: &EnvState<f64>,
    basis: &RbfBasis<f64>,
    choice: &OptionChoice<f64>,
    clock: &ControlClock<f64>,
    schedule: &DiscountSchedule<f64>,
) -> Result<OptionOutcome> {
    let spec = env.spec();
    let n = option_ticks(choice.d, clock.dt);
    let mut cur = state.clone();
    let mut reward = 0.0;
    let mut trace = Vec::with_capacity(n);
    for k in 0..n {
        let t = (k as f64 * clock.dt).min(choice.d);
        let a = evaluate(basis, choice, t, &spec.action_low, &spec.action_high)?;
        let step = env.tick(&cur, &a, clock)?;
        reward += schedule.gamma_unchecked(k as f64 * clock.dt) * step.reward * clock.dt;
        if step.bonus != 0.0 {
            reward += schedule.gamma_unchecked((k + 1) as f64 * clock.dt) * step.bonus;
        }
        trace.push(TickTrace {
            action: a,
            reward: step.reward,
            bonus: step.bonus,
        });
        cur = step.next;
        if cur.is_over() {
            break;
        }
    }
    let ticks = trace.len();
    Ok(OptionOutcome {
        reward,
        terminal: cur.done,
        truncated: cur.truncated,
        next: cur,
        elapsed: ticks as f64 * clock.dt,
        ticks,
        trace,
    })
}
