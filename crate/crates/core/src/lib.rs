//! Continuous-time reinforcement learning with variable-duration options.
//!
//! The crate is organised bottom-up:
//!
//! - [`diffnet`]: small MLPs with hand-written backprop, Adam, soft updates.
//! - [`envs`]: ODE control tasks integrated at any control frequency.
//! - [`options`]: normalized-RBF open-loop action trajectories.
//! - [`agent`]: the option-level actor-critic and its training loop.
//! - [`baselines`]: per-tick soft actor-critic and an action-repetition agent.
//! - [`harness`]: frequency sweeps, CSV output, summaries and plot data.
//!
//! The numeric building blocks are generic over [`Real`]; the learning
//! agents run in `f64`, exposed through the aliases below.

pub mod agent;
pub mod baselines;
pub mod diffnet;
pub mod envs;
pub mod error;
pub mod harness;
pub mod options;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

/// Network in the precision used by the agents.
pub type Net = diffnet::DiffNet<f64>;
pub type Environment = envs::Env<f64>;
pub type Clock = envs::ControlClock<f64>;
pub type Basis = options::RbfBasis<f64>;
pub type Choice = options::OptionChoice<f64>;
pub type Discount = agent::DiscountSchedule<f64>;
