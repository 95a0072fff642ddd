//! Discrete-event provider-selection simulator.
//!
//! A transition assigns the pending task at its arrival time, then advances
//! the clock to the next arrival and releases every task finishing on the way.
//! Completion credits land in the transition during which the completion
//! happens, so the next observation always shows up-to-date availability.

use rand::Rng;

use super::config::EnvConfig;
use super::fleet::AspProfile;
use super::workload::{generate_workload, TaskRequest};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunningTask {
    pub id: usize,
    pub steps: u32,
    pub duration: f64,
    pub start: f64,
    pub finish: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AspState {
    pub capacity: u32,
    pub running: Vec<RunningTask>,
}

impl AspState {
    pub fn held(&self) -> u32 {
        self.running.iter().map(|t| t.steps).sum()
    }

    pub fn available(&self) -> u32 {
        self.capacity - self.held()
    }
}

/// Per-transition diagnostics.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepInfo {
    pub task_id: usize,
    pub crashed: bool,
    /// Tasks restarted by a crash.
    pub interrupted: usize,
    pub completed: Vec<usize>,
    /// Sum of completion credits in this transition.
    pub utility_gained: f64,
    /// Utility of a discarded task.
    pub utility_lost: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub observation: Vec<f64>,
    pub done: bool,
    pub info: StepInfo,
}

/// Running episode totals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EpisodeStats {
    pub arrived: usize,
    pub finished: usize,
    pub crashed: usize,
    pub interrupted: usize,
    pub obtained_utility: f64,
    pub lost_utility: f64,
    pub credits: f64,
    pub penalties: f64,
    pub reward: f64,
}

impl EpisodeStats {
    pub fn finished_rate(&self) -> f64 {
        ratio(self.finished, self.arrived)
    }

    pub fn crashed_rate(&self) -> f64 {
        ratio(self.crashed, self.arrived)
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// `x → (x+1)/(x_max+2)`, strictly inside (0,1) for `0 ≤ x ≤ x_max`.
pub fn normalize(x: f64, x_max: f64) -> f64 {
    (x + 1.0) / (x_max + 2.0)
}

#[derive(Debug, Clone)]
pub struct AspEnv {
    config: EnvConfig,
    fleet: Vec<AspProfile>,
    states: Vec<AspState>,
    workload: Vec<TaskRequest>,
    cursor: usize,
    clock: f64,
    transitions: usize,
    done: bool,
    stats: EpisodeStats,
}

impl AspEnv {
    pub fn new(config: EnvConfig, fleet: Vec<AspProfile>) -> Result<Self> {
        config.validate()?;
        if fleet.len() != config.num_asps {
            return Err(Error::InvalidArgument(format!(
                "fleet has {} providers, config expects {}",
                fleet.len(),
                config.num_asps
            )));
        }
        let states = fleet
            .iter()
            .map(|a| AspState {
                capacity: a.capacity,
                running: Vec::new(),
            })
            .collect();
        Ok(AspEnv {
            config,
            fleet,
            states,
            workload: Vec::new(),
            cursor: 0,
            clock: 0.0,
            transitions: 0,
            done: true,
            stats: EpisodeStats::default(),
        })
    }

    /// Draws a fresh workload from `rng` and starts an episode.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<f64>> {
        let c = &self.config;
        let w = generate_workload(rng, c.num_tasks, c.arrival_rate, c.task_steps, c.duration)?;
        self.reset_with(w)
    }

    /// Starts an episode on a given workload.
    pub fn reset_with(&mut self, workload: Vec<TaskRequest>) -> Result<Vec<f64>> {
        if workload.is_empty() {
            return Err(Error::InvalidArgument("empty workload".into()));
        }
        if workload.windows(2).any(|p| p[1].arrival_time < p[0].arrival_time) {
            return Err(Error::InvalidArgument("arrival times must be nondecreasing".into()));
        }
        for s in &mut self.states {
            s.running.clear();
        }
        self.clock = workload[0].arrival_time;
        self.workload = workload;
        self.cursor = 0;
        self.transitions = 0;
        self.done = false;
        self.stats = EpisodeStats::default();
        Ok(self.observation())
    }

    pub fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        if action >= self.fleet.len() {
            return Err(Error::ActionOutOfRange {
                action,
                count: self.fleet.len(),
            });
        }
        let task = self.workload[self.cursor].clone();
        let now = self.clock;
        let mut info = StepInfo {
            task_id: task.id,
            ..StepInfo::default()
        };
        let f = self.config.fixed_penalty;
        let state = &mut self.states[action];
        if state.held() + task.steps <= state.capacity {
            state.running.push(RunningTask {
                id: task.id,
                steps: task.steps,
                duration: task.duration,
                start: now,
                finish: now + task.duration,
            });
        } else {
            let mut penalty = f;
            for r in &mut state.running {
                penalty += f * ((r.finish - now) / r.duration).clamp(0.0, 1.0);
                r.start = now;
                r.finish = now + r.duration;
            }
            info.crashed = true;
            info.interrupted = state.running.len();
            info.penalty = penalty;
            info.utility_lost = self.fleet[action].utility(task.steps as f64);
        }

        self.cursor += 1;
        self.transitions += 1;
        if let Some(next) = self.workload.get(self.cursor) {
            self.advance_to(next.arrival_time, &mut info);
        }
        self.done = self.transitions >= self.config.episode_len || self.cursor >= self.workload.len();

        let reward = info.utility_gained - info.penalty;
        let s = &mut self.stats;
        s.arrived += 1;
        s.finished += info.completed.len();
        s.crashed += info.crashed as usize;
        s.interrupted += info.interrupted;
        s.obtained_utility += info.utility_gained + self.config.baseline_score * info.completed.len() as f64;
        s.lost_utility += info.utility_lost;
        s.credits += info.utility_gained;
        s.penalties += info.penalty;
        s.reward += reward;
        Ok(StepOutcome {
            reward,
            observation: self.observation(),
            done: self.done,
            info,
        })
    }

    fn advance_to(&mut self, time: f64, info: &mut StepInfo) {
        debug_assert!(time >= self.clock);
        for (asp, state) in self.fleet.iter().zip(&mut self.states) {
            state.running.retain(|r| {
                if r.finish <= time {
                    info.completed.push(r.id);
                    info.utility_gained += asp.utility(r.steps as f64) - self.config.baseline_score;
                    false
                } else {
                    true
                }
            });
        }
        self.clock = time;
    }

    /// Unnormalised state `[T, o, (cap_i, avail_i)…]`; task fields are zero
    /// once the workload is exhausted.
    pub fn raw_state(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.config.obs_dim());
        match self.current_task() {
            Some(t) => v.extend([t.steps as f64, t.duration]),
            None => v.extend([0.0, 0.0]),
        }
        for s in &self.states {
            v.extend([s.capacity as f64, s.available() as f64]);
        }
        v
    }

    pub fn normalize_obs(&self, raw: &[f64]) -> Vec<f64> {
        let cap_max = self.config.capacity.hi as f64;
        raw.iter()
            .enumerate()
            .map(|(i, &x)| match i {
                0 => normalize(x, self.config.task_steps.hi as f64),
                1 => normalize(x, self.config.duration.hi),
                _ => normalize(x, cap_max),
            })
            .collect()
    }

    pub fn observation(&self) -> Vec<f64> {
        self.normalize_obs(&self.raw_state())
    }

    pub fn current_task(&self) -> Option<&TaskRequest> {
        if self.done && self.cursor >= self.workload.len() {
            return None;
        }
        self.workload.get(self.cursor)
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn fleet(&self) -> &[AspProfile] {
        &self.fleet
    }

    pub fn states(&self) -> &[AspState] {
        &self.states
    }

    pub fn availability(&self) -> Vec<u32> {
        self.states.iter().map(AspState::available).collect()
    }

    pub fn workload(&self) -> &[TaskRequest] {
        &self.workload
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn transitions(&self) -> usize {
        self.transitions
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn stats(&self) -> &EpisodeStats {
        &self.stats
    }

    pub fn running_count(&self) -> usize {
        self.states.iter().map(|s| s.running.len()).sum()
    }
}
