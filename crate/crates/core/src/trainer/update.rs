use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use super::actor::DiscreteActor;
use super::critic::CriticPair;
use super::replay::Batch;
use crate::error::{Error, Result};
use crate::nn::{AdamState, ComputeGraph, Mlp, ParamSet};
use crate::policy::entropy_of;

/// Optimiser settings shared by one update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSize {
    pub lr: f64,
    pub weight_decay: f64,
}

/// `ŷ = r + γ(1−d)·π̂(s′)ᵀ min(Q̂¹, Q̂²)(s′)`, optionally with `+ α·H(π̂(s′))`.
pub fn td_targets<A: DiscreteActor, R: Rng + ?Sized>(
    batch: &Batch,
    critics: &CriticPair,
    target_actor: &A,
    gamma: f64,
    soft_alpha: Option<f64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let probs = target_actor.probs(batch.next_states.view(), rng)?;
    let q = critics.target_q(batch.next_states.view())?;
    Ok(probs
        .axis_iter(Axis(0))
        .zip(q.axis_iter(Axis(0)))
        .enumerate()
        .map(|(i, (p, q))| {
            let mut v = p.dot(&q);
            if let Some(alpha) = soft_alpha {
                v += alpha * entropy_of(p.as_slice().expect("row-major"));
            }
            batch.rewards[i] + gamma * (1.0 - batch.dones[i]) * v
        })
        .collect())
}

/// Mean squared TD error of one critic and its parameter gradients.
pub fn critic_loss_grads(critic: &Mlp<f64>, states: ArrayView2<f64>, actions: &[usize], targets: &[f64]) -> Result<(f64, Vec<Vec<f64>>)> {
    if actions.len() != states.nrows() || targets.len() != states.nrows() {
        return Err(Error::shape("critic_loss", "batch fields disagree in length"));
    }
    let mut g = ComputeGraph::new();
    let s = g.constant(states.to_owned());
    let bound = critic.bind(&mut g);
    let q = bound.forward(&mut g, s)?;
    let qa = g.gather(q, actions)?;
    let y = g.constant(Array2::from_shape_vec((targets.len(), 1), targets.to_vec()).expect("column"));
    let diff = g.sub(qa, y)?;
    let sq = g.square(diff)?;
    let loss = g.mean(sq)?;
    let value = g.value(loss)?[[0, 0]];
    if !value.is_finite() {
        return Err(Error::NonFinite("critic loss"));
    }
    let grads = g.backward(loss)?;
    Ok((value, bound.grads(&grads)?))
}

/// One optimiser step on both online critics toward the shared TD target.
/// Returns the summed loss of the two critics.
#[allow(clippy::too_many_arguments)]
pub fn critic_update<A: DiscreteActor, R: Rng + ?Sized>(
    batch: &Batch,
    critics: &mut CriticPair,
    optimisers: &mut [AdamState<f64>; 2],
    target_actor: &A,
    gamma: f64,
    soft_alpha: Option<f64>,
    step: StepSize,
    rng: &mut R,
) -> Result<f64> {
    let targets = td_targets(batch, critics, target_actor, gamma, soft_alpha, rng)?;
    let mut pending = Vec::with_capacity(2);
    for c in &critics.online {
        pending.push(critic_loss_grads(c, batch.states.view(), &batch.actions, &targets)?);
    }
    let mut total = 0.0;
    for ((critic, opt), (loss, grads)) in critics.online.iter_mut().zip(optimisers.iter_mut()).zip(pending) {
        opt.step(critic.params_mut(), &grads, step.lr, step.weight_decay)?;
        total += loss;
    }
    Ok(total)
}

/// Result of evaluating the policy objective on a batch.
#[derive(Debug, Clone)]
pub struct ActorObjective {
    pub loss: f64,
    pub entropy: f64,
    pub grads: Vec<Vec<f64>>,
}

/// `mean(−πᵀq − α·H(π))` with `q` held constant.
pub fn actor_loss_grads<A: DiscreteActor, R: Rng + ?Sized>(
    actor: &A,
    states: ArrayView2<f64>,
    q: &Array2<f64>,
    alpha: f64,
    rng: &mut R,
) -> Result<ActorObjective> {
    if q.nrows() != states.nrows() || q.ncols() != actor.actions() {
        return Err(Error::shape("actor_loss", "q must be rows × actions"));
    }
    let mut g = ComputeGraph::new();
    let s = g.constant(states.to_owned());
    let (logits, bound) = actor.record_logits(&mut g, s, rng)?;
    let p = g.softmax(logits)?;
    let logp = g.log_softmax(logits)?;
    let qc = g.constant(q.clone());
    let pq = g.row_dot(p, qc)?;
    let neg_h = g.row_dot(p, logp)?;
    let weighted = g.scale(neg_h, alpha)?;
    let per_row = g.sub(weighted, pq)?;
    let loss = g.mean(per_row)?;
    let value = g.value(loss)?[[0, 0]];
    if !value.is_finite() {
        return Err(Error::NonFinite("actor loss"));
    }
    let entropy = -g.value(neg_h)?.mean().unwrap_or(0.0);
    let grads = g.backward(loss)?;
    Ok(ActorObjective {
        loss: value,
        entropy,
        grads: actor.bound_grads(&bound, &grads)?,
    })
}

/// One optimiser step on the actor against the frozen double-critic minimum.
pub fn actor_update<A: DiscreteActor, R: Rng + ?Sized>(
    states: ArrayView2<f64>,
    actor: &mut A,
    critics: &CriticPair,
    optimiser: &mut AdamState<f64>,
    alpha: f64,
    step: StepSize,
    rng: &mut R,
) -> Result<ActorObjective> {
    let q = critics.q(states)?;
    let obj = actor_loss_grads(actor, states, &q, alpha, rng)?;
    optimiser.step(actor.params_mut(), &obj.grads, step.lr, step.weight_decay)?;
    Ok(obj)
}
