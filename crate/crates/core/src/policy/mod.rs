//! Diffusion-based discrete action sampler: noise schedule, noise-prediction
//! actor, reverse chain and the resulting action distribution.

pub mod actor;
pub mod distribution;
pub mod sampler;
pub mod schedule;

pub use actor::{ActorNetwork, ActorShape, BoundActor};
pub use distribution::{argmax, entropy, entropy_of, sample_categorical, select_action, softmax, ActionDistribution, SelectMode};
pub use sampler::{denoise_batch, denoise_step, reverse_chain, sample_action_distribution, softmax_rows, Agod};
pub use schedule::{forward_marginal, DiffusionSchedule, NoiseScaleMode};
