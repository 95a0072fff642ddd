use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::baselines::PolicyName;
use crate::env::EnvConfig;
use crate::error::{Error, Result};
use crate::policy::NoiseScaleMode;
use crate::trainer::TrainConfig;

/// Starting point that a config file then overrides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Preset {
    /// Full-scale defaults.
    #[default]
    Paper,
    /// `E = C = L = J = 300`, small enough for a desktop.
    Desk,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Preset::Paper),
            "desk" => Ok(Preset::Desk),
            _ => Err(Error::config("preset", format!("unknown preset `{s}`, expected paper or desk"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub env: EnvConfig,
    pub train: TrainConfig,
    pub policy: PolicyName,
    pub seeds: Vec<u64>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            env: EnvConfig::default(),
            train: TrainConfig::default(),
            policy: PolicyName::D2sac,
            seeds: vec![1, 2, 3],
            out_dir: PathBuf::from("runs"),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: Display,
{
    value
        .parse()
        .map_err(|e| Error::config(key, format!("cannot parse `{value}`: {e}")))
}

macro_rules! fields {
    ($self:ident, $visit:ident) => {
        $visit!("env.num_asps", $self.env.num_asps);
        $visit!("env.capacity_lo", $self.env.capacity.lo);
        $visit!("env.capacity_hi", $self.env.capacity.hi);
        $visit!("env.task_steps_lo", $self.env.task_steps.lo);
        $visit!("env.task_steps_hi", $self.env.task_steps.hi);
        $visit!("env.duration_lo", $self.env.duration.lo);
        $visit!("env.duration_hi", $self.env.duration.hi);
        $visit!("env.arrival_rate", $self.env.arrival_rate);
        $visit!("env.num_tasks", $self.env.num_tasks);
        $visit!("env.episode_len", $self.env.episode_len);
        $visit!("env.anchor_ax_lo", $self.env.anchor_ax.lo);
        $visit!("env.anchor_ax_hi", $self.env.anchor_ax.hi);
        $visit!("env.anchor_ay_lo", $self.env.anchor_ay.lo);
        $visit!("env.anchor_ay_hi", $self.env.anchor_ay.hi);
        $visit!("env.anchor_bx_lo", $self.env.anchor_bx.lo);
        $visit!("env.anchor_bx_hi", $self.env.anchor_bx.hi);
        $visit!("env.anchor_by_lo", $self.env.anchor_by.lo);
        $visit!("env.anchor_by_hi", $self.env.anchor_by.hi);
        $visit!("env.fixed_penalty", $self.env.fixed_penalty);
        $visit!("env.baseline_score", $self.env.baseline_score);
        $visit!("train.actor_lr", $self.train.actor_lr);
        $visit!("train.critic_lr", $self.train.critic_lr);
        $visit!("train.alpha", $self.train.alpha);
        $visit!("train.tau", $self.train.tau);
        $visit!("train.batch_size", $self.train.batch_size);
        $visit!("train.weight_decay", $self.train.weight_decay);
        $visit!("train.gamma", $self.train.gamma);
        $visit!("train.denoise_steps", $self.train.denoise_steps);
        $visit!("train.beta_min", $self.train.beta_min);
        $visit!("train.beta_max", $self.train.beta_max);
        $visit!("train.buffer_capacity", $self.train.buffer_capacity);
        $visit!("train.train_steps", $self.train.train_steps);
        $visit!("train.collect_per_step", $self.train.collect_per_step);
        $visit!("train.updates_per_step", $self.train.updates_per_step);
        $visit!("train.eval_every", $self.train.eval_every);
        $visit!("train.eval_episodes", $self.train.eval_episodes);
        $visit!("train.hidden", $self.train.hidden);
        $visit!("train.soft_target", $self.train.soft_target);
        $visit!("train.wall_clock", $self.train.wall_clock);
        $visit!("train.trace_every", $self.train.trace_every);
    };
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        let mut cfg = ExperimentConfig::default();
        if preset == Preset::Desk {
            cfg.train.train_steps = 300;
            cfg.train.collect_per_step = 300;
            cfg.env.episode_len = 300;
            cfg.env.num_tasks = 300;
        }
        cfg
    }

    /// Sets one dotted key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        macro_rules! assign {
            ($k:expr, $field:expr) => {
                if key == $k {
                    $field = parse_value(key, value)?;
                    return Ok(());
                }
            };
        }
        fields!(self, assign);
        match key {
            "train.noise_mode" => {
                self.train.noise_mode = NoiseScaleMode::parse(value)
                    .ok_or_else(|| Error::config(key, format!("`{value}` is not squared or ddpm")))?;
            }
            "experiment.policy" => {
                self.policy = value.parse().map_err(|_| Error::config(key, format!("unknown policy `{value}`")))?;
            }
            "experiment.seeds" => {
                self.seeds = value
                    .split(',')
                    .map(|s| parse_value::<u64>(key, s.trim()))
                    .collect::<Result<_>>()?;
            }
            "experiment.out_dir" => self.out_dir = PathBuf::from(value),
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Every key with its current value, sorted by key.
    pub fn entries(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        macro_rules! collect {
            ($k:expr, $field:expr) => {
                out.insert($k.to_string(), $field.to_string());
            };
        }
        fields!(self, collect);
        out.insert("train.noise_mode".into(), self.train.noise_mode.name().into());
        out.insert("experiment.policy".into(), self.policy.to_string());
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        out.insert("experiment.seeds".into(), seeds.join(","));
        out.insert("experiment.out_dir".into(), self.out_dir.display().to_string());
        out
    }

    /// Canonical text form: one `key=value` per line in key order.
    pub fn serialize(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// SHA-256 of the canonical form, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.serialize().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.train.validate()?;
        if self.seeds.is_empty() {
            return Err(Error::config("experiment.seeds", "at least one seed required"));
        }
        let mut sorted = self.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.seeds.len() {
            return Err(Error::config("experiment.seeds", "seeds must be distinct"));
        }
        if self.out_dir.as_os_str().is_empty() {
            return Err(Error::config("experiment.out_dir", "must not be empty"));
        }
        Ok(())
    }
}

/// Parses `text` over the full-scale defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_over(text, ExperimentConfig::default())
}

/// Applies `key=value` lines to `base`. Blank lines and `#` comments are
/// skipped; a key may appear once.
pub fn parse_config_over(text: &str, base: ExperimentConfig) -> Result<ExperimentConfig> {
    let mut cfg = base;
    let mut seen = std::collections::HashSet::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::config(format!("line {}", n + 1), "expected key=value"))?;
        let key = key.trim();
        if !seen.insert(key.to_string()) {
            return Err(Error::config(key, "duplicate key"));
        }
        cfg.set(key, value.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}
