use rand::{Rng, RngCore};

use super::{DecisionView, Policy};
use crate::error::{Error, Result};
use crate::policy::argmax;

/// Uniform choice that ignores the state.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    actions: usize,
}

impl RandomPolicy {
    pub fn new(actions: usize) -> Self {
        RandomPolicy { actions }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn act(&mut self, _view: &DecisionView<'_>, rng: &mut dyn RngCore) -> Result<usize> {
        Ok(rng.random_range(0..self.actions))
    }
}

/// Cycles through providers in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRobinPolicy {
    actions: usize,
    cursor: usize,
}

impl RoundRobinPolicy {
    pub fn new(actions: usize) -> Self {
        RoundRobinPolicy { actions, cursor: 0 }
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn next_action(&mut self) -> usize {
        let a = self.cursor;
        self.cursor = (self.cursor + 1) % self.actions;
        a
    }

    /// `cursor/actions`.
    pub fn encode(&self) -> String {
        format!("{}/{}", self.cursor, self.actions)
    }

    pub fn decode(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("bad round-robin state `{s}`"));
        let (c, n) = s.split_once('/').ok_or_else(bad)?;
        let (cursor, actions): (usize, usize) = (c.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?);
        if cursor >= actions {
            return Err(bad());
        }
        Ok(RoundRobinPolicy { actions, cursor })
    }
}

impl Policy for RoundRobinPolicy {
    fn name(&self) -> &'static str {
        "round_robin"
    }

    fn reset(&mut self) {
        self.cursor = 0;
    }

    fn act(&mut self, _view: &DecisionView<'_>, _rng: &mut dyn RngCore) -> Result<usize> {
        Ok(self.next_action())
    }
}

/// Most available provider according to the observation, lowest index on ties.
#[derive(Debug, Clone, Copy)]
pub struct CrashAvoidPolicy;

impl CrashAvoidPolicy {
    pub fn choose(observation: &[f64]) -> usize {
        let avail: Vec<f64> = observation[2..].iter().skip(1).step_by(2).copied().collect();
        argmax(&avail)
    }
}

impl Policy for CrashAvoidPolicy {
    fn name(&self) -> &'static str {
        "crash_avoid"
    }

    fn act(&mut self, view: &DecisionView<'_>, _rng: &mut dyn RngCore) -> Result<usize> {
        Ok(Self::choose(view.observation))
    }
}

/// Privileged upper bound: the best-utility provider the task fits on,
/// otherwise the most available one.
#[derive(Debug, Clone, Copy)]
pub struct ProphetPolicy;

impl ProphetPolicy {
    pub fn choose(view: &DecisionView<'_>) -> usize {
        let Some(task) = view.task else {
            return argmax(&view.availability.iter().map(|&a| a as f64).collect::<Vec<_>>());
        };
        let mut best: Option<(usize, f64)> = None;
        for (i, asp) in view.fleet.iter().enumerate() {
            if task.steps <= view.availability[i] {
                let u = asp.utility(task.steps as f64);
                if best.is_none_or(|(_, b)| u > b) {
                    best = Some((i, u));
                }
            }
        }
        match best {
            Some((i, _)) => i,
            None => argmax(&view.availability.iter().map(|&a| a as f64).collect::<Vec<_>>()),
        }
    }
}

impl Policy for ProphetPolicy {
    fn name(&self) -> &'static str {
        "prophet"
    }

    fn act(&mut self, view: &DecisionView<'_>, _rng: &mut dyn RngCore) -> Result<usize> {
        Ok(Self::choose(view))
    }
}
