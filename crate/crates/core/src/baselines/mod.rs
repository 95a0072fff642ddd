//! Scheduling policies behind one interface: heuristics, the privileged
//! upper bound, and wrappers around trained actors.

mod heuristics;
mod sac_mlp;

use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use crate::env::{AspEnv, AspProfile, TaskRequest};
use crate::error::{Error, Result};

pub use heuristics::{CrashAvoidPolicy, ProphetPolicy, RandomPolicy, RoundRobinPolicy};
pub use sac_mlp::{ActorPolicy, MlpActor};

/// What a policy may look at when choosing a provider. Only the observation
/// is legitimate input for learned and heuristic policies; the remaining
/// fields are ground truth reserved for the prophet.
#[derive(Debug, Clone)]
pub struct DecisionView<'a> {
    pub observation: &'a [f64],
    pub task: Option<&'a TaskRequest>,
    pub fleet: &'a [AspProfile],
    pub availability: Vec<u32>,
}

impl<'a> DecisionView<'a> {
    pub fn of(env: &'a AspEnv, observation: &'a [f64]) -> Self {
        DecisionView {
            observation,
            task: env.current_task(),
            fleet: env.fleet(),
            availability: env.availability(),
        }
    }

    pub fn actions(&self) -> usize {
        self.fleet.len()
    }
}

pub trait Policy {
    fn name(&self) -> &'static str;

    /// Called before each episode.
    fn reset(&mut self) {}

    fn act(&mut self, view: &DecisionView<'_>, rng: &mut dyn RngCore) -> Result<usize>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyName {
    Random,
    RoundRobin,
    CrashAvoid,
    Prophet,
    SacMlp,
    D2sac,
}

impl PolicyName {
    pub const ALL: [PolicyName; 6] = [
        PolicyName::Random,
        PolicyName::RoundRobin,
        PolicyName::CrashAvoid,
        PolicyName::Prophet,
        PolicyName::SacMlp,
        PolicyName::D2sac,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PolicyName::Random => "random",
            PolicyName::RoundRobin => "round_robin",
            PolicyName::CrashAvoid => "crash_avoid",
            PolicyName::Prophet => "prophet",
            PolicyName::SacMlp => "sac_mlp",
            PolicyName::D2sac => "d2sac",
        }
    }

    pub fn is_learned(self) -> bool {
        matches!(self, PolicyName::SacMlp | PolicyName::D2sac)
    }

    /// Heuristic instance; `None` for learned policies.
    pub fn heuristic(self, actions: usize) -> Option<Box<dyn Policy>> {
        Some(match self {
            PolicyName::Random => Box::new(RandomPolicy::new(actions)),
            PolicyName::RoundRobin => Box::new(RoundRobinPolicy::new(actions)),
            PolicyName::CrashAvoid => Box::new(CrashAvoidPolicy),
            PolicyName::Prophet => Box::new(ProphetPolicy),
            PolicyName::SacMlp | PolicyName::D2sac => return None,
        })
    }
}

impl fmt::Display for PolicyName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolicyName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::config("policy", format!("unknown policy `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_round_trip() {
        for p in PolicyName::ALL {
            assert_eq!(p.as_str().parse::<PolicyName>().unwrap(), p);
        }
        assert!("dqn".parse::<PolicyName>().is_err());
    }
}
