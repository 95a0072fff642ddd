use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: PartialOrd + Copy> Range<T> {
    pub const fn new(lo: T, hi: T) -> Self {
        Range { lo, hi }
    }

    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }
}

/// Simulator parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    pub num_asps: usize,
    /// Provider capacity in denoising-step units.
    pub capacity: Range<u32>,
    /// Steps demanded per task.
    pub task_steps: Range<u32>,
    /// Task duration in simulated seconds.
    pub duration: Range<f64>,
    /// Poisson arrival rate, tasks per second.
    pub arrival_rate: f64,
    pub num_tasks: usize,
    /// Transitions per episode.
    pub episode_len: usize,
    pub anchor_ax: Range<f64>,
    pub anchor_ay: Range<f64>,
    pub anchor_bx: Range<f64>,
    pub anchor_by: Range<f64>,
    /// Fixed part of the crash penalty.
    pub fixed_penalty: f64,
    /// Subtracted from every completed task's utility.
    pub baseline_score: f64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            num_asps: 20,
            capacity: Range::new(400, 1000),
            task_steps: Range::new(100, 250),
            duration: Range::new(5_000.0, 20_000.0),
            arrival_rate: 0.001,
            num_tasks: 1000,
            episode_len: 1000,
            anchor_ax: Range::new(0.0, 100.0),
            anchor_ay: Range::new(0.0, 0.5),
            anchor_bx: Range::new(150.0, 250.0),
            anchor_by: Range::new(0.5, 1.0),
            fixed_penalty: 2.0,
            baseline_score: 0.0,
        }
    }
}

impl EnvConfig {
    pub fn obs_dim(&self) -> usize {
        2 + 2 * self.num_asps
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |k: &str, r: &str| Err(Error::config(format!("env.{k}"), r));
        if self.num_asps == 0 {
            return bad("num_asps", "at least one provider required");
        }
        if self.num_tasks == 0 {
            return bad("num_tasks", "at least one task required");
        }
        if self.episode_len == 0 || self.episode_len > self.num_tasks {
            return bad("episode_len", "must be in 1..=num_tasks");
        }
        if self.capacity.lo == 0 || self.capacity.lo > self.capacity.hi {
            return bad("capacity", "need 0 < lo <= hi");
        }
        if self.task_steps.lo == 0 || self.task_steps.lo > self.task_steps.hi {
            return bad("task_steps", "need 0 < lo <= hi");
        }
        if !(self.duration.lo > 0.0 && self.duration.lo <= self.duration.hi && self.duration.hi.is_finite()) {
            return bad("duration", "need 0 < lo <= hi < inf");
        }
        if !(self.arrival_rate > 0.0 && self.arrival_rate.is_finite()) {
            return bad("arrival_rate", "must be positive");
        }
        for (k, r) in [
            ("anchor_ax", self.anchor_ax),
            ("anchor_ay", self.anchor_ay),
            ("anchor_bx", self.anchor_bx),
            ("anchor_by", self.anchor_by),
        ] {
            if r.lo.is_nan() || r.hi.is_nan() || r.lo > r.hi {
                return bad(k, "need lo <= hi");
            }
        }
        if self.anchor_ax.hi >= self.anchor_bx.lo {
            return bad("anchor_bx", "every A_x must lie below every B_x");
        }
        if self.anchor_ay.lo < 0.0 || self.anchor_by.hi > 1.0 || self.anchor_ay.hi > self.anchor_by.lo {
            return bad("anchor_by", "need 0 <= A_y <= B_y <= 1");
        }
        if self.fixed_penalty.is_nan() || self.fixed_penalty < 0.0 {
            return bad("fixed_penalty", "must be non-negative");
        }
        if !self.baseline_score.is_finite() {
            return bad("baseline_score", "must be finite");
        }
        Ok(())
    }
}
