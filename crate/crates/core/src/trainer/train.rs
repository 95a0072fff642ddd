use std::time::Instant;

use ndarray::Array2;

use super::actor::DiscreteActor;
use super::critic::CriticPair;
use super::eval::{evaluate, EvalMetrics};
use super::replay::{ReplayBuffer, Transition};
use super::update::{actor_update, critic_update, StepSize};
use crate::baselines::{ActorPolicy, MlpActor};
use crate::env::{generate_workload, sample_fleet, AspEnv, AspProfile, EnvConfig, TaskRequest};
use crate::error::{Error, Result};
use crate::nn::{soft_update, AdamState};
use crate::policy::{entropy_of, sample_categorical, ActorNetwork, ActorShape, Agod, DiffusionSchedule, NoiseScaleMode};
use crate::seeds::{SeedStreams, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub actor_lr: f64,
    pub critic_lr: f64,
    /// Entropy temperature.
    pub alpha: f64,
    pub tau: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    pub gamma: f64,
    pub denoise_steps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    pub noise_mode: NoiseScaleMode,
    pub buffer_capacity: usize,
    /// Training steps `E`.
    pub train_steps: usize,
    /// Transitions collected per training step `C`.
    pub collect_per_step: usize,
    /// Gradient updates per training step; one unless deliberately ablated.
    pub updates_per_step: usize,
    pub eval_every: usize,
    pub eval_episodes: usize,
    pub hidden: usize,
    /// Adds the entropy bonus to the critic target.
    pub soft_target: bool,
    /// Record real elapsed time; off gives a zero column and fully
    /// reproducible metrics files.
    pub wall_clock: bool,
    /// Snapshot the denoising chain every this many steps; 0 disables.
    pub trace_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            alpha: 0.05,
            tau: 0.005,
            batch_size: 512,
            weight_decay: 1e-4,
            gamma: 0.95,
            denoise_steps: 5,
            beta_min: 0.1,
            beta_max: 10.0,
            noise_mode: NoiseScaleMode::Squared,
            buffer_capacity: 1_000_000,
            train_steps: 1000,
            collect_per_step: 1000,
            updates_per_step: 1,
            eval_every: 1,
            eval_episodes: 1,
            hidden: 256,
            soft_target: false,
            wall_clock: false,
            trace_every: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, r: &str| Err(Error::config(format!("train.{k}"), r));
        let positive = [
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
            ("beta_min", self.beta_min),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(k, "must be positive");
            }
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha", "must be non-negative");
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay", "must be non-negative");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau", "must be in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma", "must be in [0, 1]");
        }
        if !(self.beta_max > self.beta_min && self.beta_max.is_finite()) {
            return bad("beta_max", "must exceed beta_min");
        }
        for (k, v) in [
            ("denoise_steps", self.denoise_steps),
            ("batch_size", self.batch_size),
            ("buffer_capacity", self.buffer_capacity),
            ("train_steps", self.train_steps),
            ("collect_per_step", self.collect_per_step),
            ("updates_per_step", self.updates_per_step),
            ("eval_every", self.eval_every),
            ("eval_episodes", self.eval_episodes),
            ("hidden", self.hidden),
        ] {
            if v == 0 {
                return bad(k, "must be at least 1");
            }
        }
        if self.batch_size > self.buffer_capacity {
            return bad("batch_size", "must not exceed buffer_capacity");
        }
        Ok(())
    }

    pub fn schedule(&self) -> Result<DiffusionSchedule<f64>> {
        DiffusionSchedule::vp(self.denoise_steps, self.beta_min, self.beta_max)
    }
}

/// One row of the per-step metrics log. Optional fields are empty on steps
/// where they were not computed.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub step: usize,
    pub env_steps: usize,
    pub train_reward: Option<f64>,
    pub test_reward: Option<f64>,
    pub actor_loss: Option<f64>,
    pub critic_loss: Option<f64>,
    pub entropy: Option<f64>,
    pub crashed_rate: Option<f64>,
    pub finished_rate: Option<f64>,
    pub wall_time_s: f64,
}

impl MetricsRow {
    pub const HEADER: [&'static str; 10] = [
        "step",
        "env_steps",
        "train_reward",
        "test_reward",
        "actor_loss",
        "critic_loss",
        "entropy",
        "crashed_rate",
        "finished_rate",
        "wall_time_s",
    ];

    pub fn record(&self) -> [String; 10] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.step.to_string(),
            self.env_steps.to_string(),
            opt(self.train_reward),
            opt(self.test_reward),
            opt(self.actor_loss),
            opt(self.critic_loss),
            opt(self.entropy),
            opt(self.crashed_rate),
            opt(self.finished_rate),
            self.wall_time_s.to_string(),
        ]
    }
}

/// Fixed inputs of one training run.
#[derive(Debug, Clone)]
pub struct TrainContext {
    pub env_config: EnvConfig,
    pub fleet: Vec<AspProfile>,
    pub eval_workloads: Vec<Vec<TaskRequest>>,
    pub streams: SeedStreams,
}

impl TrainContext {
    /// Fleet and held-out workloads drawn from their own streams.
    pub fn new(env_config: EnvConfig, eval_episodes: usize, streams: SeedStreams) -> Result<Self> {
        env_config.validate()?;
        let fleet = sample_fleet(&env_config, &mut streams.rng(Stream::Fleet));
        let eval_workloads = eval_workloads(&env_config, eval_episodes, streams)?;
        Ok(TrainContext {
            env_config,
            fleet,
            eval_workloads,
            streams,
        })
    }

    pub fn env(&self) -> Result<AspEnv> {
        AspEnv::new(self.env_config.clone(), self.fleet.clone())
    }
}

pub fn eval_workloads(env: &EnvConfig, episodes: usize, streams: SeedStreams) -> Result<Vec<Vec<TaskRequest>>> {
    let mut rng = streams.rng(Stream::EvalWorkload);
    (0..episodes)
        .map(|_| generate_workload(&mut rng, env.num_tasks, env.arrival_rate, env.task_steps, env.duration))
        .collect()
}

pub fn new_agod(cfg: &TrainConfig, env: &EnvConfig, streams: SeedStreams) -> Result<Agod<f64>> {
    let mut shape = ActorShape::standard(env.num_asps, env.obs_dim());
    shape.hidden = cfg.hidden;
    let actor = ActorNetwork::new(shape, &mut streams.rng(Stream::ActorInit));
    Ok(Agod::new(actor, cfg.schedule()?, cfg.noise_mode))
}

pub fn new_mlp_actor(cfg: &TrainConfig, env: &EnvConfig, streams: SeedStreams) -> MlpActor {
    MlpActor::new(env.obs_dim(), env.num_asps, cfg.hidden, &mut streams.rng(Stream::ActorInit))
}

/// Greedy evaluation with a fresh, fixed noise stream.
pub fn evaluate_actor<A: DiscreteActor>(actor: &A, ctx: &TrainContext) -> Result<EvalMetrics> {
    let mut env = ctx.env()?;
    let mut policy = ActorPolicy::greedy(actor.clone());
    evaluate(&mut policy, &mut env, &ctx.eval_workloads, &mut ctx.streams.rng(Stream::EvalNoise))
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<A> {
    pub actor: A,
    pub target_actor: A,
    pub critics: CriticPair,
    pub rows: Vec<MetricsRow>,
    pub final_eval: EvalMetrics,
    pub traces: Vec<ChainTrace>,
}

/// The denoising chain `x_T, …, x_0` for one probe observation at a
/// training step.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    pub step: usize,
    pub points: Vec<Vec<f64>>,
}

impl<A> TrainOutcome<A> {
    pub fn final_test_reward(&self) -> f64 {
        self.final_eval.test_reward
    }
}

/// The training loop: each step collects `C` transitions with the current
/// actor, then makes one batch update of both critics, the actor and all
/// target networks once the buffer holds a full batch.
pub fn train<A: DiscreteActor>(
    cfg: &TrainConfig,
    ctx: &TrainContext,
    actor: A,
    on_row: &mut dyn FnMut(&MetricsRow) -> Result<()>,
) -> Result<TrainOutcome<A>> {
    cfg.validate()?;
    let started = Instant::now();
    let obs_dim = ctx.env_config.obs_dim();
    if actor.state_dim() != obs_dim || actor.actions() != ctx.env_config.num_asps {
        return Err(Error::shape("train", "actor does not match the environment"));
    }
    let streams = ctx.streams;
    let mut workload_rng = streams.rng(Stream::TrainWorkload);
    let mut replay_rng = streams.rng(Stream::Replay);
    let mut diffusion_rng = streams.rng(Stream::Diffusion);
    let mut explore_rng = streams.rng(Stream::Exploration);

    let mut actor = actor;
    let mut target_actor = actor.clone();
    let mut critics = CriticPair::new(obs_dim, ctx.env_config.num_asps, cfg.hidden, &mut streams.rng(Stream::CriticInit));
    let mut actor_opt = AdamState::new(&actor);
    let mut critic_opts = [AdamState::new(&critics.online[0]), AdamState::new(&critics.online[1])];
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity)?;
    let actor_step = StepSize {
        lr: cfg.actor_lr,
        weight_decay: cfg.weight_decay,
    };
    let critic_step = StepSize {
        lr: cfg.critic_lr,
        weight_decay: cfg.weight_decay,
    };
    let soft_alpha = cfg.soft_target.then_some(cfg.alpha);

    let mut env = ctx.env()?;
    let mut obs = env.reset(&mut workload_rng)?;
    let mut episode_reward = 0.0;
    let mut last_episode_reward: Option<f64> = None;
    let mut last_eval: Option<EvalMetrics> = None;
    let mut rows = Vec::with_capacity(cfg.train_steps);
    let mut traces = Vec::new();
    let mut trace_rng = streams.rng(Stream::Trace);
    let probe = probe_observation(ctx)?;

    for step in 1..=cfg.train_steps {
        let mut finished = Vec::new();
        let mut entropy_sum = 0.0;
        for _ in 0..cfg.collect_per_step {
            let s = Array2::from_shape_vec((1, obs_dim), obs.clone()).expect("row vector");
            let probs = actor.probs(s.view(), &mut diffusion_rng)?;
            let probs = probs.as_slice().expect("row-major");
            entropy_sum += entropy_of(probs);
            let action = sample_categorical(probs, &mut explore_rng);
            let out = env.step(action)?;
            episode_reward += out.reward;
            buffer.store(Transition {
                state: std::mem::take(&mut obs),
                action,
                next_state: out.observation.clone(),
                reward: out.reward,
                done: out.done,
            });
            if out.done {
                finished.push(episode_reward);
                episode_reward = 0.0;
                obs = env.reset(&mut workload_rng)?;
            } else {
                obs = out.observation;
            }
        }
        if !finished.is_empty() {
            last_episode_reward = Some(finished.iter().sum::<f64>() / finished.len() as f64);
        }

        let (mut actor_loss, mut critic_loss) = (None, None);
        for _ in 0..cfg.updates_per_step {
            if buffer.len() < cfg.batch_size {
                break;
            }
            let batch = buffer.sample(cfg.batch_size, &mut replay_rng)?;
            match critic_update(
                &batch,
                &mut critics,
                &mut critic_opts,
                &target_actor,
                cfg.gamma,
                soft_alpha,
                critic_step,
                &mut diffusion_rng,
            ) {
                Ok(l) => critic_loss = Some(l),
                Err(Error::NonFinite(_)) => {}
                Err(e) => return Err(e),
            }
            match actor_update(
                batch.states.view(),
                &mut actor,
                &critics,
                &mut actor_opt,
                cfg.alpha,
                actor_step,
                &mut diffusion_rng,
            ) {
                Ok(obj) => actor_loss = Some(obj.loss),
                Err(Error::NonFinite(_)) => {}
                Err(e) => return Err(e),
            }
            soft_update(&actor, &mut target_actor, cfg.tau);
            critics.soft_update(cfg.tau);
        }

        let evaluate_now = step % cfg.eval_every == 0 || step == cfg.train_steps;
        let eval = if evaluate_now {
            let m = evaluate_actor(&actor, ctx)?;
            last_eval = Some(m);
            Some(m)
        } else {
            None
        };
        let row = MetricsRow {
            step,
            env_steps: step * cfg.collect_per_step,
            train_reward: Some(last_episode_reward.unwrap_or(episode_reward)),
            test_reward: eval.map(|m| m.test_reward),
            actor_loss,
            critic_loss,
            entropy: Some(entropy_sum / cfg.collect_per_step as f64),
            crashed_rate: eval.map(|m| m.crashed_rate),
            finished_rate: eval.map(|m| m.finished_rate),
            wall_time_s: if cfg.wall_clock {
                started.elapsed().as_secs_f64()
            } else {
                0.0
            },
        };
        if cfg.trace_every > 0 && (step % cfg.trace_every == 0 || step == cfg.train_steps) {
            if let Some(points) = actor.trace(&probe, &mut trace_rng)? {
                traces.push(ChainTrace { step, points });
            }
        }
        on_row(&row)?;
        rows.push(row);
    }

    Ok(TrainOutcome {
        final_eval: last_eval.expect("last step always evaluates"),
        actor,
        target_actor,
        critics,
        rows,
        traces,
    })
}

/// First observation of the first held-out workload.
fn probe_observation(ctx: &TrainContext) -> Result<Vec<f64>> {
    let mut env = ctx.env()?;
    let workload = ctx.eval_workloads.first().cloned().unwrap_or_default();
    env.reset_with(workload)
}
