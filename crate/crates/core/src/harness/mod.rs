//! Experiment front-end: configuration, seeded runs, sweeps and plot data.

mod config;
mod plots;
mod run;
mod sweep;

pub use config::{parse_config, parse_config_over, ExperimentConfig, Preset};
pub use plots::{emit_plot_data, PlotReport, PlotRow, DIFFUSION_TRACES_FILE, REWARD_CURVES_FILE, SWEEP_CURVES_FILE};
pub use run::{
    evaluate_heuristic, evaluate_saved, load_config, mean, prepare_out_dir, run_experiment, seed_dir, std_dev,
    ExperimentReport, SeedResult, SeedStatus, CONFIG_FILE, FINAL_EVAL_FILE, MANIFEST_FILE, METRICS_FILE, SUMMARY_FILE,
    TRACE_FILE,
};
pub use sweep::{run_sweep, SweepParam, SweepPoint, SweepRun, SweepSpec, SweepTable, SWEEP_RUNS_FILE, SWEEP_SUMMARY_FILE};
