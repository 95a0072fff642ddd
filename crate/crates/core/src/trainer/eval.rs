use rand::RngCore;

use crate::baselines::{DecisionView, Policy};
use crate::env::{AspEnv, EpisodeStats, TaskRequest};
use crate::error::{Error, Result};

/// Episode averages over a set of workloads.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalMetrics {
    pub test_reward: f64,
    pub finished_rate: f64,
    pub crashed_rate: f64,
    pub obtained_utility: f64,
    pub lost_utility: f64,
    pub episodes: usize,
}

pub fn run_episode(
    policy: &mut dyn Policy,
    env: &mut AspEnv,
    workload: Vec<TaskRequest>,
    rng: &mut dyn RngCore,
) -> Result<EpisodeStats> {
    policy.reset();
    let mut obs = env.reset_with(workload)?;
    loop {
        let action = policy.act(&DecisionView::of(env, &obs), rng)?;
        let out = env.step(action)?;
        obs = out.observation;
        if out.done {
            return Ok(env.stats().clone());
        }
    }
}

/// Runs `policy` once per workload and averages the episode totals.
pub fn evaluate(
    policy: &mut dyn Policy,
    env: &mut AspEnv,
    workloads: &[Vec<TaskRequest>],
    rng: &mut dyn RngCore,
) -> Result<EvalMetrics> {
    if workloads.is_empty() {
        return Err(Error::InvalidArgument("evaluation needs at least one workload".into()));
    }
    let mut m = EvalMetrics {
        episodes: workloads.len(),
        ..EvalMetrics::default()
    };
    for w in workloads {
        let s = run_episode(policy, env, w.clone(), rng)?;
        m.test_reward += s.reward;
        m.finished_rate += s.finished_rate();
        m.crashed_rate += s.crashed_rate();
        m.obtained_utility += s.obtained_utility;
        m.lost_utility += s.lost_utility;
    }
    let n = workloads.len() as f64;
    m.test_reward /= n;
    m.finished_rate /= n;
    m.crashed_rate /= n;
    m.obtained_utility /= n;
    m.lost_utility /= n;
    Ok(m)
}
