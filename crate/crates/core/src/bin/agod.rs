use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use agod::baselines::PolicyName;
use agod::harness::{
    emit_plot_data, evaluate_heuristic, evaluate_saved, load_config, parse_config_over, prepare_out_dir, run_experiment,
    run_sweep, ExperimentConfig, ExperimentReport, Preset, SweepParam, SweepSpec, FINAL_EVAL_FILE,
};
use agod::seeds::SeedStreams;
use agod::trainer::{EvalMetrics, TrainContext};
use agod::Error;

#[derive(Parser)]
#[command(name = "agod", version, about = "Diffusion soft actor-critic for service-provider selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a learned policy, or evaluate a heuristic, for every seed.
    Train(Common),
    /// Evaluate a finished experiment's saved actors or a heuristic.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Output directory of an earlier `train`.
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Repeat an experiment over values of one parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// denoise_steps, alpha or lambda (arrival rate).
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Convert experiment and sweep output into long-format CSVs.
    ExportPlots {
        /// Directory holding experiment or sweep output.
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        overwrite: bool,
    },
}

#[derive(Args)]
struct Common {
    /// key=value config file applied over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    policy: Option<PolicyName>,
    /// Repeat for several seeds.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    #[arg(long, default_value = "paper")]
    preset: Preset,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    overwrite: bool,
}

impl Common {
    fn resolve(&self) -> agod::Result<ExperimentConfig> {
        let text = match &self.config {
            Some(p) => fs::read_to_string(p).map_err(|e| Error::Io {
                path: p.clone(),
                source: e,
            })?,
            None => String::new(),
        };
        let mut cfg = parse_config_over(&text, ExperimentConfig::preset(self.preset))?;
        if let Some(p) = self.policy {
            cfg.policy = p;
        }
        if !self.seeds.is_empty() {
            cfg.seeds = self.seeds.clone();
        }
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn failure_line(kind: &str, message: &str) -> String {
    format!("error kind={kind} message={message:?}")
}

fn report_seeds(report: &ExperimentReport) -> agod::Result<()> {
    for s in &report.seeds {
        match s.test_reward() {
            Some(r) => println!("policy={} seed={} status=completed test_reward={r}", report.policy, s.seed),
            None => println!("policy={} seed={} status=failed", report.policy, s.seed),
        }
    }
    if let Some(m) = report.mean_test_reward() {
        println!("policy={} mean_test_reward={m} out={}", report.policy, report.out_dir.display());
    }
    let failed = report.failures();
    if failed.is_empty() {
        Ok(())
    } else {
        let msg: Vec<String> = failed.iter().map(|(s, e)| format!("seed {s}: {e}")).collect();
        Err(Error::InvalidArgument(format!("seed failures: {}", msg.join("; "))))
    }
}

fn write_evals(path: &Path, policy: PolicyName, rows: &[(u64, EvalMetrics)]) -> agod::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "policy",
        "seed",
        "test_reward",
        "finished_rate",
        "crashed_rate",
        "obtained_utility",
        "lost_utility",
    ])?;
    for (seed, m) in rows {
        w.write_record([
            policy.to_string(),
            seed.to_string(),
            m.test_reward.to_string(),
            m.finished_rate.to_string(),
            m.crashed_rate.to_string(),
            m.obtained_utility.to_string(),
            m.lost_utility.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn eval(common: &Common, from: Option<&Path>) -> agod::Result<()> {
    let (cfg, from) = match from {
        Some(dir) => {
            let mut cfg = load_config(dir)?;
            if !common.seeds.is_empty() {
                cfg.seeds = common.seeds.clone();
            }
            (cfg, Some(dir))
        }
        None => {
            let cfg = common.resolve()?;
            if cfg.policy.is_learned() {
                return Err(Error::InvalidArgument(format!("{} needs --from <train output>", cfg.policy)));
            }
            (cfg, None)
        }
    };
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let m = match from {
            Some(dir) => evaluate_saved(dir, &cfg, seed)?,
            None => {
                let ctx = TrainContext::new(cfg.env.clone(), cfg.train.eval_episodes, SeedStreams::new(seed))?;
                evaluate_heuristic(cfg.policy, &ctx)?
            }
        };
        println!(
            "policy={} seed={seed} test_reward={} crashed_rate={} finished_rate={}",
            cfg.policy, m.test_reward, m.crashed_rate, m.finished_rate
        );
        rows.push((seed, m));
    }
    if let Some(out) = &common.out {
        prepare_out_dir(out, common.overwrite)?;
        write_evals(&out.join(FINAL_EVAL_FILE), cfg.policy, &rows)?;
    }
    Ok(())
}

fn run(cli: Cli) -> agod::Result<()> {
    match cli.command {
        Command::Train(common) => {
            let cfg = common.resolve()?;
            let report = run_experiment(&cfg, common.overwrite)?;
            report_seeds(&report)
        }
        Command::Eval { common, from } => eval(&common, from.as_deref()),
        Command::Sweep { common, param, values } => {
            let cfg = common.resolve()?;
            let spec = SweepSpec {
                param,
                values,
                seeds: cfg.seeds.clone(),
            };
            let table = run_sweep(&spec, &cfg, common.overwrite)?;
            for p in &table.points {
                println!(
                    "param={} value={} seeds={} mean_test_reward={} mean_wall_time_s={}",
                    table.param, p.value, p.seeds, p.mean_test_reward, p.mean_wall_time_s
                );
            }
            table.reports.iter().try_for_each(|r| {
                let failed = r.failures();
                if failed.is_empty() {
                    Ok(())
                } else {
                    Err(Error::InvalidArgument(format!("{}: {} seed(s) failed", r.out_dir.display(), failed.len())))
                }
            })
        }
        Command::ExportPlots { from, out, overwrite } => {
            let report = emit_plot_data(&from, &out, overwrite)?;
            for p in &report.written {
                println!("wrote={}", p.display());
            }
            for m in &report.missing {
                eprintln!("missing={m:?}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", failure_line("usage", first));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", failure_line(e.kind(), &e.to_string()));
            ExitCode::FAILURE
        }
    }
}
