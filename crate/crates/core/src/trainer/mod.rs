//! Soft actor-critic training with a double critic and a swappable actor.

mod actor;
mod critic;
mod eval;
mod replay;
mod train;
mod update;

pub use actor::DiscreteActor;
pub use critic::{critic_network, q_values, CriticPair};
pub use eval::{evaluate, run_episode, EvalMetrics};
pub use replay::{Batch, ReplayBuffer, Transition};
pub use train::{
    eval_workloads, evaluate_actor, ChainTrace, new_agod, new_mlp_actor, train, MetricsRow, TrainConfig, TrainContext, TrainOutcome,
};
pub use update::{actor_loss_grads, actor_update, critic_loss_grads, critic_update, td_targets, ActorObjective, StepSize};
