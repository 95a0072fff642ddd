mod config;
mod fleet;
mod sim;
mod workload;

pub use config::{EnvConfig, Range};
pub use fleet::{read_fleet_csv, sample_fleet, write_fleet_csv, AspProfile};
pub use sim::{normalize, AspEnv, AspState, EpisodeStats, RunningTask, StepInfo, StepOutcome};
pub use workload::{generate_workload, read_workload_csv, write_workload_csv, TaskRequest};
