use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

use super::run::{csv_writer, load_config, prepare_out_dir, seed_dir, CONFIG_FILE, METRICS_FILE, TRACE_FILE};
use super::sweep::SWEEP_RUNS_FILE;

pub const REWARD_CURVES_FILE: &str = "reward_curves.csv";
pub const DIFFUSION_TRACES_FILE: &str = "diffusion_traces.csv";
pub const SWEEP_CURVES_FILE: &str = "sweep_curves.csv";

/// One long-format record.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotRow {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct PlotReport {
    pub written: Vec<PathBuf>,
    /// Inputs that were expected but absent or unreadable.
    pub missing: Vec<String>,
}

fn find_dirs(root: &Path, marker: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    if root.join(marker).is_file() {
        out.push(root.to_path_buf());
    }
    let mut children: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| Error::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    children.sort();
    for c in children {
        find_dirs(&c, marker, out)?;
    }
    Ok(())
}

fn read_table(path: &Path) -> Result<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let rows = r.records().collect::<std::result::Result<_, _>>()?;
    Ok((headers, rows))
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::InvalidArgument(format!("{}: no `{name}` column", path.display())))
}

fn number(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn write_rows(path: &Path, rows: &[PlotRow]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["series", "x", "y", "seed"])?;
    for r in rows.iter().filter(|r| r.x.is_finite() && r.y.is_finite()) {
        w.write_record([r.series.clone(), r.x.to_string(), r.y.to_string(), r.seed.to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct Experiment {
    dir: PathBuf,
    series: String,
    learned: bool,
    seeds: Vec<u64>,
}

/// Converts experiment and sweep output found under `input` into
/// long-format CSVs in `out`: reward curves, diffusion traces and sweep
/// curves. Non-finite values are dropped.
pub fn emit_plot_data(input: &Path, out: &Path, overwrite: bool) -> Result<PlotReport> {
    if !input.is_dir() {
        return Err(Error::InvalidArgument(format!("{} is not a directory", input.display())));
    }
    let input_abs = input.canonicalize().map_err(|e| Error::io(input, e))?;
    if out.exists() {
        let out_abs = out.canonicalize().map_err(|e| Error::io(out, e))?;
        if input_abs.starts_with(&out_abs) {
            return Err(Error::InvalidArgument("plot output must not contain the input".into()));
        }
    }

    let mut exp_dirs = Vec::new();
    find_dirs(input, CONFIG_FILE, &mut exp_dirs)?;
    let mut sweep_dirs = Vec::new();
    find_dirs(input, SWEEP_RUNS_FILE, &mut sweep_dirs)?;
    if exp_dirs.is_empty() && sweep_dirs.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no experiment or sweep output under {}",
            input.display()
        )));
    }

    let mut report = PlotReport::default();
    let mut experiments = Vec::new();
    for dir in exp_dirs {
        match load_config(&dir) {
            Ok(cfg) => experiments.push(Experiment {
                series: cfg.policy.to_string(),
                learned: cfg.policy.is_learned(),
                seeds: cfg.seeds,
                dir,
            }),
            Err(e) => report.missing.push(format!("{}: {e}", dir.join(CONFIG_FILE).display())),
        }
    }
    // Several runs of one policy are told apart by their directory.
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for e in &experiments {
        *counts.entry(e.series.clone()).or_default() += 1;
    }
    for e in &mut experiments {
        if counts[&e.series] > 1 {
            let rel = e.dir.strip_prefix(input).unwrap_or(&e.dir);
            e.series = format!("{}:{}", e.series, rel.display());
        }
    }

    let mut curves = Vec::new();
    let mut traces = Vec::new();
    let mut last_step = 0.0_f64;
    let mut flat = Vec::new();
    for e in &experiments {
        for &seed in &e.seeds {
            let sd = seed_dir(&e.dir, seed);
            let metrics = sd.join(METRICS_FILE);
            match read_table(&metrics) {
                Ok((headers, rows)) => {
                    let (xi, yi) = (column(&headers, "step", &metrics)?, column(&headers, "test_reward", &metrics)?);
                    for row in rows {
                        let (Some(x), Some(y)) = (number(&row[xi]), number(&row[yi])) else { continue };
                        let r = PlotRow {
                            series: e.series.clone(),
                            x,
                            y,
                            seed,
                        };
                        if e.learned {
                            last_step = last_step.max(x);
                            curves.push(r);
                        } else {
                            flat.push(r);
                        }
                    }
                }
                Err(err) => report.missing.push(format!("{}: {err}", metrics.display())),
            }
            let trace = sd.join(TRACE_FILE);
            if e.learned && trace.is_file() {
                let (headers, rows) = read_table(&trace)?;
                let idx = ["step", "t", "action", "value"]
                    .map(|c| column(&headers, c, &trace))
                    .into_iter()
                    .collect::<Result<Vec<_>>>()?;
                for row in rows {
                    let (Some(x), Some(y)) = (number(&row[idx[1]]), number(&row[idx[3]])) else { continue };
                    traces.push(PlotRow {
                        series: format!("{}/step_{}/action_{}", e.series, &row[idx[0]], &row[idx[2]]),
                        x,
                        y,
                        seed,
                    });
                }
            }
        }
    }
    // Heuristics are constant: draw them across the learned curves' span.
    for r in flat {
        if last_step > r.x {
            curves.push(PlotRow { x: last_step, ..r.clone() });
        }
        curves.push(r);
    }

    let mut sweeps = Vec::new();
    for dir in sweep_dirs {
        let path = dir.join(SWEEP_RUNS_FILE);
        let (headers, rows) = read_table(&path)?;
        let idx = ["param", "value", "seed", "test_reward", "wall_time_s"]
            .map(|c| column(&headers, c, &path))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        for row in rows {
            let (Some(x), Ok(seed)) = (number(&row[idx[1]]), row[idx[2]].parse::<u64>()) else { continue };
            for (metric, i) in [("test_reward", idx[3]), ("wall_time_s", idx[4])] {
                if let Some(y) = number(&row[i]) {
                    sweeps.push(PlotRow {
                        series: format!("{}/{metric}", &row[idx[0]]),
                        x,
                        y,
                        seed,
                    });
                }
            }
        }
    }

    prepare_out_dir(out, overwrite)?;
    for (name, rows) in [
        (REWARD_CURVES_FILE, &curves),
        (DIFFUSION_TRACES_FILE, &traces),
        (SWEEP_CURVES_FILE, &sweeps),
    ] {
        if rows.is_empty() {
            continue;
        }
        let path = out.join(name);
        write_rows(&path, rows)?;
        report.written.push(path);
    }
    Ok(report)
}
