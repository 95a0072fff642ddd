//! Reverse denoising chain that turns Gaussian noise into an action
//! distribution conditioned on the observation.
//!
//! Each step computes
//!
//! ```text
//! μ = (x_t − β_t·ε̂ / √(1 − ᾱ_t)) / √α_t
//! x_{t−1} = μ + σ_t·z,   z ~ N(0, I)
//! ```
//!
//! where `ε̂ = tanh(ε_θ(x_t, t, s))` is the actor output and `σ_t` follows
//! [`NoiseScaleMode`]. The fresh noise is drawn up front, so the chain is a
//! deterministic, differentiable function of the actor parameters given the
//! random draws. Random draws are consumed in a fixed order: `x_T` first,
//! then one noise block per step from `t = T` down to `t = 1`.

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use super::actor::{ActorNetwork, BoundActor};
use super::distribution::ActionDistribution;
use super::schedule::{DiffusionSchedule, NoiseScaleMode};
use crate::error::{Error, Result};
use crate::nn::{ComputeGraph, NodeId};
use crate::scalar::Scalar;

pub fn standard_normal<S: Scalar, R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Array2<S> {
    Array2::from_shape_simple_fn((rows, cols), || S::of(rng.sample::<f64, _>(StandardNormal)))
}

/// One reverse step on a batch. `noise` has the shape of `x_t`.
pub fn denoise_batch<S: Scalar>(
    x_t: ArrayView2<S>,
    t: usize,
    states: ArrayView2<S>,
    actor: &ActorNetwork<S>,
    schedule: &DiffusionSchedule<S>,
    noise: ArrayView2<S>,
    mode: NoiseScaleMode,
) -> Result<Array2<S>> {
    schedule.check_step(t)?;
    if noise.dim() != x_t.dim() {
        return Err(Error::shape("denoise", "noise and x_t shapes differ"));
    }
    let eps = actor.predict_noise(x_t, t, states)?;
    let (c_eps, c_mean, c_noise) = (schedule.eps_coef(t), schedule.mean_scale(t), schedule.noise_scale(t, mode));
    let mut out = Array2::zeros(x_t.dim());
    ndarray::Zip::from(&mut out)
        .and(&x_t)
        .and(&eps)
        .and(&noise)
        .for_each(|o, &x, &e, &z| *o = (x - c_eps * e) * c_mean + c_noise * z);
    Ok(out)
}

/// One reverse step for a single observation.
pub fn denoise_step<S: Scalar>(
    x_t: &[S],
    t: usize,
    state: &[S],
    actor: &ActorNetwork<S>,
    schedule: &DiffusionSchedule<S>,
    noise: &[S],
    mode: NoiseScaleMode,
) -> Result<Vec<S>> {
    let row = |v: &[S]| Array2::from_shape_vec((1, v.len()), v.to_vec()).expect("row vector");
    let out = denoise_batch(
        row(x_t).view(),
        t,
        row(state).view(),
        actor,
        schedule,
        row(noise).view(),
        mode,
    )?;
    Ok(out.into_iter().collect())
}

/// Runs the full chain for a batch of observations and returns `x_0`.
///
/// When `trace` is given it receives `x_T, …, x_0`; tracing does not change
/// how many random numbers are drawn.
pub fn reverse_chain<S: Scalar, R: Rng + ?Sized>(
    states: ArrayView2<S>,
    actor: &ActorNetwork<S>,
    schedule: &DiffusionSchedule<S>,
    mode: NoiseScaleMode,
    rng: &mut R,
    mut trace: Option<&mut Vec<Array2<S>>>,
) -> Result<Array2<S>> {
    let (rows, actions) = (states.nrows(), actor.actions());
    let mut x = standard_normal::<S, R>(rows, actions, rng);
    if let Some(tr) = trace.as_deref_mut() {
        tr.push(x.clone());
    }
    for t in (1..=schedule.steps()).rev() {
        let z = standard_normal::<S, R>(rows, actions, rng);
        x = denoise_batch(x.view(), t, states, actor, schedule, z.view(), mode)?;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(x.clone());
        }
    }
    Ok(x)
}

pub fn softmax_rows<S: Scalar>(x: &Array2<S>) -> Array2<S> {
    let mut out = x.clone();
    for mut row in out.axis_iter_mut(Axis(0)) {
        let max = row.iter().copied().fold(S::neg_infinity(), S::max);
        row.mapv_inplace(|v| (v - max).exp());
        let sum: S = row.iter().copied().sum();
        row.mapv_inplace(|v| v / sum);
    }
    out
}

/// Diffusion policy: actor, schedule and noise-scale mode bundled together.
#[derive(Debug, Clone)]
pub struct Agod<S> {
    pub actor: ActorNetwork<S>,
    pub schedule: DiffusionSchedule<S>,
    pub mode: NoiseScaleMode,
}

impl<S: Scalar> Agod<S> {
    pub fn new(actor: ActorNetwork<S>, schedule: DiffusionSchedule<S>, mode: NoiseScaleMode) -> Self {
        Agod { actor, schedule, mode }
    }

    /// Action probabilities for every row of `states`.
    pub fn probs_batch<R: Rng + ?Sized>(&self, states: ArrayView2<S>, rng: &mut R) -> Result<Array2<S>> {
        let x0 = reverse_chain(states, &self.actor, &self.schedule, self.mode, rng, None)?;
        Ok(softmax_rows(&x0))
    }

    /// Records the chain on `g` and returns the `x_0` node (rows × actions).
    pub fn record_chain<R: Rng + ?Sized>(
        &self,
        g: &mut ComputeGraph<S>,
        bound: &BoundActor,
        states: NodeId,
        rng: &mut R,
    ) -> Result<NodeId> {
        let rows = g.value(states)?.nrows();
        let actions = self.actor.actions();
        let mut x = g.constant(standard_normal::<S, R>(rows, actions, rng));
        for t in (1..=self.schedule.steps()).rev() {
            let z = standard_normal::<S, R>(rows, actions, rng);
            let eps = bound.predict_noise(g, x, t, states)?;
            let scaled = g.scale(eps, self.schedule.eps_coef(t))?;
            let centred = g.sub(x, scaled)?;
            let mean = g.scale(centred, self.schedule.mean_scale(t))?;
            let noise = g.constant(z * self.schedule.noise_scale(t, self.mode));
            x = g.add(mean, noise)?;
        }
        Ok(x)
    }
}

/// Samples `π_θ(s)` for one observation.
pub fn sample_action_distribution<S: Scalar, R: Rng + ?Sized>(
    state: &[S],
    policy: &Agod<S>,
    rng: &mut R,
    record_trace: bool,
) -> Result<ActionDistribution> {
    if state.len() != policy.actor.state_dim() {
        return Err(Error::shape(
            "sample_action_distribution",
            format!("state has {} entries, actor expects {}", state.len(), policy.actor.state_dim()),
        ));
    }
    let states = Array2::from_shape_vec((1, state.len()), state.to_vec()).expect("row vector");
    let mut trace = Vec::new();
    let x0 = reverse_chain(
        states.view(),
        &policy.actor,
        &policy.schedule,
        policy.mode,
        rng,
        record_trace.then_some(&mut trace),
    )?;
    let x0: Vec<f64> = x0.iter().map(|v| v.to_f64_lossy()).collect();
    let mut dist = ActionDistribution::from_logits(x0);
    if record_trace {
        dist.trace = Some(
            trace
                .into_iter()
                .map(|m| m.iter().map(|v| v.to_f64_lossy()).collect())
                .collect(),
        );
    }
    Ok(dist)
}
