use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

use super::config::ExperimentConfig;
use super::run::{csv_writer, mean, prepare_out_dir, run_experiment, std_dev, write_file, ExperimentReport, SeedStatus};

pub const SWEEP_FILE: &str = "sweep.txt";
pub const SWEEP_RUNS_FILE: &str = "sweep_runs.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    DenoiseSteps,
    Alpha,
    /// Task arrival rate.
    Lambda,
}

impl SweepParam {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParam::DenoiseSteps => "denoise_steps",
            SweepParam::Alpha => "alpha",
            SweepParam::Lambda => "lambda",
        }
    }

    /// Writes `value` into the matching config field.
    /// Sets the parameter on `cfg`. On error `cfg` is left unchanged.
    pub fn apply(self, cfg: &mut ExperimentConfig, value: f64) -> Result<()> {
        let mut next = cfg.clone();
        match self {
            SweepParam::DenoiseSteps => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= 1e6) {
                    return Err(Error::config("sweep.values", "denoise_steps values must be positive integers"));
                }
                next.train.denoise_steps = value as usize;
            }
            SweepParam::Alpha => next.train.alpha = value,
            SweepParam::Lambda => next.env.arrival_rate = value,
        }
        next.validate()?;
        *cfg = next;
        Ok(())
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "denoise_steps" => Ok(SweepParam::DenoiseSteps),
            "alpha" => Ok(SweepParam::Alpha),
            "lambda" => Ok(SweepParam::Lambda),
            _ => Err(Error::config(
                "sweep.param",
                format!("`{s}` is not sweepable; use denoise_steps, alpha or lambda"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::config("sweep.values", "at least one value required"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("sweep.values", "values must be finite"));
        }
        for (i, a) in self.values.iter().enumerate() {
            if self.values[..i].contains(a) {
                return Err(Error::config("sweep.values", format!("{a} listed twice")));
            }
        }
        if self.seeds.is_empty() {
            return Err(Error::config("sweep.seeds", "at least one seed required"));
        }
        Ok(())
    }
}

/// Seed-level result of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub value: f64,
    pub seed: u64,
    pub completed: bool,
    pub test_reward: Option<f64>,
    pub wall_time_s: f64,
}

/// Seed average at one sweep value. The `_norm` columns divide by the
/// largest magnitude across values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub seeds: usize,
    pub mean_test_reward: f64,
    pub std_test_reward: f64,
    pub mean_wall_time_s: f64,
    pub reward_norm: f64,
    pub wall_time_norm: f64,
}

#[derive(Debug, Clone)]
pub struct SweepTable {
    pub param: SweepParam,
    pub runs: Vec<SweepRun>,
    pub points: Vec<SweepPoint>,
    pub reports: Vec<ExperimentReport>,
}

impl SweepTable {
    pub fn point(&self, value: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.value == value)
    }
}

fn normalise(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    xs.iter().map(|x| if max > 0.0 { x / max } else { 0.0 }).collect()
}

/// Runs `base` once per sweep value, each in its own subdirectory of
/// `base.out_dir`, and tabulates final test reward and wall time.
pub fn run_sweep(spec: &SweepSpec, base: &ExperimentConfig, overwrite: bool) -> Result<SweepTable> {
    spec.validate()?;
    let mut configs = Vec::with_capacity(spec.values.len());
    for &v in &spec.values {
        let mut cfg = base.clone();
        cfg.seeds = spec.seeds.clone();
        spec.param.apply(&mut cfg, v)?;
        cfg.out_dir = base.out_dir.join(format!("{}_{v}", spec.param));
        configs.push(cfg);
    }
    let out = &base.out_dir;
    prepare_out_dir(out, overwrite)?;
    let values: Vec<String> = spec.values.iter().map(f64::to_string).collect();
    let seeds: Vec<String> = spec.seeds.iter().map(u64::to_string).collect();
    write_file(
        &out.join(SWEEP_FILE),
        &format!("param={}\nvalues={}\nseeds={}\n", spec.param, values.join(","), seeds.join(",")),
    )?;

    let mut runs = Vec::new();
    let mut reports = Vec::new();
    for (cfg, &value) in configs.iter().zip(&spec.values) {
        let report = run_experiment(cfg, false)?;
        for s in &report.seeds {
            runs.push(SweepRun {
                value,
                seed: s.seed,
                completed: s.status == SeedStatus::Completed,
                test_reward: s.test_reward(),
                wall_time_s: s.wall_time_s,
            });
        }
        reports.push(report);
    }

    let mut points: Vec<SweepPoint> = spec
        .values
        .iter()
        .filter_map(|&value| {
            let done: Vec<&SweepRun> = runs.iter().filter(|r| r.value == value && r.completed).collect();
            let rewards: Vec<f64> = done.iter().filter_map(|r| r.test_reward).collect();
            let walls: Vec<f64> = done.iter().map(|r| r.wall_time_s).collect();
            Some(SweepPoint {
                value,
                seeds: done.len(),
                mean_test_reward: mean(&rewards)?,
                std_test_reward: std_dev(&rewards),
                mean_wall_time_s: mean(&walls)?,
                reward_norm: 0.0,
                wall_time_norm: 0.0,
            })
        })
        .collect();
    let rn = normalise(&points.iter().map(|p| p.mean_test_reward).collect::<Vec<_>>());
    let wn = normalise(&points.iter().map(|p| p.mean_wall_time_s).collect::<Vec<_>>());
    for (p, (r, w)) in points.iter_mut().zip(rn.into_iter().zip(wn)) {
        p.reward_norm = r;
        p.wall_time_norm = w;
    }

    let table = SweepTable {
        param: spec.param,
        runs,
        points,
        reports,
    };
    write_tables(out, &table)?;
    Ok(table)
}

fn write_tables(out: &Path, t: &SweepTable) -> Result<()> {
    let path = out.join(SWEEP_RUNS_FILE);
    let mut w = csv_writer(&path)?;
    w.write_record(["param", "value", "seed", "status", "test_reward", "wall_time_s"])?;
    for r in &t.runs {
        w.write_record([
            t.param.to_string(),
            r.value.to_string(),
            r.seed.to_string(),
            if r.completed { "completed" } else { "failed" }.to_string(),
            r.test_reward.map(|v| v.to_string()).unwrap_or_default(),
            r.wall_time_s.to_string(),
        ])?;
    }
    w.flush().map_err(|e| crate::Error::io(&path, e))?;

    let path = out.join(SWEEP_SUMMARY_FILE);
    let mut w = csv_writer(&path)?;
    w.write_record([
        "param",
        "value",
        "seeds",
        "mean_test_reward",
        "std_test_reward",
        "mean_wall_time_s",
        "reward_norm",
        "wall_time_norm",
    ])?;
    for p in &t.points {
        w.write_record([
            t.param.to_string(),
            p.value.to_string(),
            p.seeds.to_string(),
            p.mean_test_reward.to_string(),
            p.std_test_reward.to_string(),
            p.mean_wall_time_s.to_string(),
            p.reward_norm.to_string(),
            p.wall_time_norm.to_string(),
        ])?;
    }
    w.flush().map_err(|e| crate::Error::io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_validation() {
        assert_eq!("lambda".parse::<SweepParam>().unwrap(), SweepParam::Lambda);
        assert!("gamma".parse::<SweepParam>().is_err());
        let spec = SweepSpec {
            param: SweepParam::Alpha,
            values: vec![],
            seeds: vec![1],
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn apply_checks_values() {
        let mut cfg = ExperimentConfig::default();
        SweepParam::DenoiseSteps.apply(&mut cfg, 10.0).unwrap();
        assert_eq!(cfg.train.denoise_steps, 10);
        assert!(SweepParam::DenoiseSteps.apply(&mut cfg, 2.5).is_err());
        assert!(SweepParam::Lambda.apply(&mut cfg, 0.0).is_err());
        assert_eq!(cfg.env.arrival_rate, ExperimentConfig::default().env.arrival_rate);
        SweepParam::Alpha.apply(&mut cfg, 0.0).unwrap();
        assert_eq!(cfg.train.alpha, 0.0);
    }

    #[test]
    fn normalisation_divides_by_largest_magnitude() {
        assert_eq!(normalise(&[1.0, 2.0, 4.0]), vec![0.25, 0.5, 1.0]);
        assert_eq!(normalise(&[-2.0, 1.0]), vec![-1.0, 0.5]);
        assert_eq!(normalise(&[0.0]), vec![0.0]);
    }
}
