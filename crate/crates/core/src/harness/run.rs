use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::baselines::{ActorPolicy, PolicyName};
use crate::error::{Error, Result};
use crate::nn::checkpoint::{load_layers, save_layers};
use crate::seeds::{SeedStreams, Stream};
use crate::trainer::{
    evaluate, evaluate_actor, new_agod, new_mlp_actor, train, ChainTrace, DiscreteActor, EvalMetrics, MetricsRow,
    TrainContext, TrainOutcome,
};

use super::config::{parse_config, ExperimentConfig};

pub const CONFIG_FILE: &str = "config.txt";
pub const METRICS_FILE: &str = "metrics.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const FINAL_EVAL_FILE: &str = "final_eval.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const TRACE_FILE: &str = "trace.csv";

const FINAL_EVAL_HEADER: [&str; 9] = [
    "seed",
    "status",
    "test_reward",
    "finished_rate",
    "crashed_rate",
    "obtained_utility",
    "lost_utility",
    "wall_time_s",
    "error",
];

#[derive(Debug, Clone, PartialEq)]
pub enum SeedStatus {
    Completed,
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub status: SeedStatus,
    pub final_eval: Option<EvalMetrics>,
    pub rows: Vec<MetricsRow>,
    pub wall_time_s: f64,
}

impl SeedResult {
    pub fn test_reward(&self) -> Option<f64> {
        self.final_eval.map(|m| m.test_reward)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub config_hash: String,
    pub policy: PolicyName,
    pub seeds: Vec<SeedResult>,
}

impl ExperimentReport {
    pub fn completed(&self) -> impl Iterator<Item = &SeedResult> {
        self.seeds.iter().filter(|s| s.status == SeedStatus::Completed)
    }

    pub fn failures(&self) -> Vec<(u64, &str)> {
        self.seeds
            .iter()
            .filter_map(|s| match &s.status {
                SeedStatus::Failed(e) => Some((s.seed, e.as_str())),
                SeedStatus::Completed => None,
            })
            .collect()
    }

    /// Mean final test reward over completed seeds.
    pub fn mean_test_reward(&self) -> Option<f64> {
        mean(&self.completed().filter_map(SeedResult::test_reward).collect::<Vec<_>>())
    }
}

pub fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    match mean(xs) {
        Some(m) if xs.len() > 1 => (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt(),
        _ => 0.0,
    }
}

pub fn seed_dir(out: &Path, seed: u64) -> PathBuf {
    out.join(format!("seed_{seed}"))
}

/// Creates `dir`, refusing to reuse a non-empty one unless `overwrite` is
/// set. Only directories that look like harness output are cleared.
pub fn prepare_out_dir(dir: &Path, overwrite: bool) -> Result<()> {
    if dir.exists() {
        let empty = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.next().is_none();
        if !empty {
            if !overwrite {
                return Err(Error::OutputExists(dir.to_path_buf()));
            }
            let ours = [CONFIG_FILE, FINAL_EVAL_FILE, super::sweep::SWEEP_FILE, super::plots::REWARD_CURVES_FILE]
                .iter()
                .any(|f| dir.join(f).exists());
            if !ours {
                return Err(Error::InvalidArgument(format!(
                    "{} does not look like experiment output; refusing to clear it",
                    dir.display()
                )));
            }
            fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Reads the stored config of a finished experiment.
pub fn load_config(dir: &Path) -> Result<ExperimentConfig> {
    let path = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    parse_config(&text)
}

/// Trains (or, for heuristics, evaluates) every seed and writes the results
/// under `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig, overwrite: bool) -> Result<ExperimentReport> {
    cfg.validate()?;
    let out = cfg.out_dir.clone();
    prepare_out_dir(&out, overwrite)?;
    write_file(&out.join(CONFIG_FILE), &cfg.serialize())?;
    let hash = cfg.hash();

    let mut seeds = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        let dir = seed_dir(&out, seed);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let started = Instant::now();
        let result = run_seed(cfg, seed, &dir);
        let wall_time_s = started.elapsed().as_secs_f64();
        let seed_result = match result {
            Ok((rows, final_eval)) => SeedResult {
                seed,
                status: SeedStatus::Completed,
                final_eval: Some(final_eval),
                rows,
                wall_time_s,
            },
            Err(e @ (Error::Io { .. } | Error::Csv(_))) => return Err(e),
            Err(e) => SeedResult {
                seed,
                status: SeedStatus::Failed(e.to_string()),
                final_eval: None,
                rows: Vec::new(),
                wall_time_s,
            },
        };
        write_manifest(&dir, &hash, cfg, &seed_result)?;
        seeds.push(seed_result);
    }

    let report = ExperimentReport {
        out_dir: out.clone(),
        config_hash: hash,
        policy: cfg.policy,
        seeds,
    };
    write_final_eval(&out.join(FINAL_EVAL_FILE), &report)?;
    write_summary(&out.join(SUMMARY_FILE), &report)?;
    Ok(report)
}

fn run_seed(cfg: &ExperimentConfig, seed: u64, dir: &Path) -> Result<(Vec<MetricsRow>, EvalMetrics)> {
    let streams = SeedStreams::new(seed);
    let ctx = TrainContext::new(cfg.env.clone(), cfg.train.eval_episodes, streams)?;
    let metrics_path = dir.join(METRICS_FILE);
    let mut writer = csv_writer(&metrics_path)?;
    writer.write_record(MetricsRow::HEADER)?;
    let mut on_row = |row: &MetricsRow| -> Result<()> {
        writer.write_record(row.record())?;
        writer.flush().map_err(|e| Error::io(&metrics_path, e))
    };
    match cfg.policy {
        PolicyName::D2sac => {
            let actor = new_agod(&cfg.train, &cfg.env, streams)?;
            let outcome = train(&cfg.train, &ctx, actor, &mut on_row)?;
            finish_learned(dir, outcome)
        }
        PolicyName::SacMlp => {
            let actor = new_mlp_actor(&cfg.train, &cfg.env, streams);
            let outcome = train(&cfg.train, &ctx, actor, &mut on_row)?;
            finish_learned(dir, outcome)
        }
        heuristic => {
            let m = evaluate_heuristic(heuristic, &ctx)?;
            let row = heuristic_row(&m);
            on_row(&row)?;
            Ok((vec![row], m))
        }
    }
}

fn finish_learned<A: DiscreteActor>(dir: &Path, outcome: TrainOutcome<A>) -> Result<(Vec<MetricsRow>, EvalMetrics)> {
    save_layers(&dir.join("actor.ckpt"), &outcome.actor.layers())?;
    save_layers(&dir.join("critic_a.ckpt"), &outcome.critics.online[0].layers)?;
    save_layers(&dir.join("critic_b.ckpt"), &outcome.critics.online[1].layers)?;
    if !outcome.traces.is_empty() {
        write_traces(&dir.join(TRACE_FILE), &outcome.traces)?;
    }
    Ok((outcome.rows, outcome.final_eval))
}

/// A heuristic has no training curve; its single row sits at step 0.
fn heuristic_row(m: &EvalMetrics) -> MetricsRow {
    MetricsRow {
        step: 0,
        env_steps: 0,
        train_reward: None,
        test_reward: Some(m.test_reward),
        actor_loss: None,
        critic_loss: None,
        entropy: None,
        crashed_rate: Some(m.crashed_rate),
        finished_rate: Some(m.finished_rate),
        wall_time_s: 0.0,
    }
}

/// Runs a fixed policy over the held-out workloads of `ctx`.
pub fn evaluate_heuristic(policy: PolicyName, ctx: &TrainContext) -> Result<EvalMetrics> {
    let mut p = policy
        .heuristic(ctx.env_config.num_asps)
        .ok_or_else(|| Error::InvalidArgument(format!("{policy} needs a trained actor")))?;
    let mut env = ctx.env()?;
    evaluate(p.as_mut(), &mut env, &ctx.eval_workloads, &mut ctx.streams.rng(Stream::Policy))
}

/// Evaluates the policy of a finished experiment for one seed, loading the
/// saved actor when the policy is learned.
pub fn evaluate_saved(dir: &Path, cfg: &ExperimentConfig, seed: u64) -> Result<EvalMetrics> {
    let streams = SeedStreams::new(seed);
    let ctx = TrainContext::new(cfg.env.clone(), cfg.train.eval_episodes, streams)?;
    let ckpt = seed_dir(dir, seed).join("actor.ckpt");
    match cfg.policy {
        PolicyName::D2sac => {
            let actor = new_agod(&cfg.train, &cfg.env, streams)?.with_layers(load_layers(&ckpt)?)?;
            evaluate_actor(&actor, &ctx)
        }
        PolicyName::SacMlp => {
            let actor = crate::baselines::MlpActor::from_layers(load_layers(&ckpt)?)?;
            let mut policy = ActorPolicy::greedy(actor);
            let mut env = ctx.env()?;
            evaluate(&mut policy, &mut env, &ctx.eval_workloads, &mut streams.rng(Stream::EvalNoise))
        }
        heuristic => evaluate_heuristic(heuristic, &ctx),
    }
}

fn write_traces(path: &Path, traces: &[ChainTrace]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["step", "t", "action", "value"])?;
    for tr in traces {
        let chain_len = tr.points.len();
        for (i, point) in tr.points.iter().enumerate() {
            let t = chain_len - 1 - i;
            for (a, v) in point.iter().enumerate() {
                w.write_record([tr.step.to_string(), t.to_string(), a.to_string(), v.to_string()])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_manifest(dir: &Path, hash: &str, cfg: &ExperimentConfig, r: &SeedResult) -> Result<()> {
    let (status, reward) = match &r.status {
        SeedStatus::Completed => ("completed", r.test_reward().map(|v| v.to_string()).unwrap_or_default()),
        SeedStatus::Failed(_) => ("failed", String::new()),
    };
    let step = r.rows.last().map_or(0, |row| row.step);
    let mut text = format!(
        "config_hash={hash}\nseed={}\npolicy={}\nstep={step}\nstatus={status}\nfinal_test_reward={reward}\n",
        r.seed, cfg.policy
    );
    if let SeedStatus::Failed(e) = &r.status {
        text.push_str(&format!("error={}\n", e.replace('\n', " ")));
    }
    write_file(&dir.join(MANIFEST_FILE), &text)
}

fn write_final_eval(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(FINAL_EVAL_HEADER)?;
    for s in &report.seeds {
        let f = |g: fn(&EvalMetrics) -> f64| s.final_eval.as_ref().map(|m| g(m).to_string()).unwrap_or_default();
        let (status, error) = match &s.status {
            SeedStatus::Completed => ("completed", String::new()),
            SeedStatus::Failed(e) => ("failed", e.clone()),
        };
        w.write_record([
            s.seed.to_string(),
            status.to_string(),
            f(|m| m.test_reward),
            f(|m| m.finished_rate),
            f(|m| m.crashed_rate),
            f(|m| m.obtained_utility),
            f(|m| m.lost_utility),
            s.wall_time_s.to_string(),
            error,
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Mean and standard deviation across completed seeds of each metrics
/// column's final value, plus the final utilities.
fn write_summary(path: &Path, report: &ExperimentReport) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["metric", "mean", "std", "seeds"])?;
    let done: Vec<&SeedResult> = report.completed().collect();
    let mut columns: Vec<(&str, Vec<f64>)> = Vec::new();
    for (i, name) in MetricsRow::HEADER.iter().enumerate().skip(2) {
        let vals = done
            .iter()
            .filter_map(|s| s.rows.last())
            .filter_map(|row| row.record()[i].parse::<f64>().ok())
            .collect();
        columns.push((name, vals));
    }
    let util = |g: fn(&EvalMetrics) -> f64| done.iter().filter_map(|s| s.final_eval.as_ref().map(g)).collect::<Vec<_>>();
    columns.push(("obtained_utility", util(|m| m.obtained_utility)));
    columns.push(("lost_utility", util(|m| m.lost_utility)));
    for (name, vals) in columns {
        let Some(m) = mean(&vals) else { continue };
        w.write_record([name.to_string(), m.to_string(), std_dev(&vals).to_string(), vals.len().to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
