//! Option-level soft actor-critic in continuous time.
//!
//! The policy picks an option `(ω, d)`; the option runs open-loop for `d`
//! seconds while reward is integrated with discount `e^{−τ(κ−t)}`; the critic
//! regresses `Q(s, ω, d)` onto a variable-discount Bellman target; the actor
//! follows the reparameterized gradient through the critic's input gradients.

pub mod config;
pub mod discount;
pub mod dist;
pub mod execute;
pub mod learner;
pub mod policy;
pub mod replay;
pub mod train;

pub use config::CtcoConfig;
pub use discount::{default_tau, DiscountSchedule};
pub use execute::{execute_option, option_ticks, OptionOutcome, TickTrace};
pub use learner::{bellman_target, check_actor_gradient, CtcoLearner, SmdpTransition, UpdateStats};
pub use policy::{OptionNoise, OptionPolicy, OptionSample, PolicyHeads};
pub use replay::ReplayBuffer;
pub use train::{evaluate_untrained, quantize_duration, train, EpisodeStats, TrainReport};
