//! Experiment orchestration: presets, repeated runs, statistics and files.

mod config;
mod optimizer;
mod output;
mod run;

pub use config::{ExperimentConfig, Task, TaskEnv, CONFIG_KEYS};
pub use optimizer::{run_landscape, run_landscape_with_workers, LandscapeRun};
pub use output::{
    read_results, read_summary, summary_path, write_results, write_snapshots, write_summary,
    write_sweep, SnapshotRow, NOT_AVAILABLE, RESULTS_HEADER, SNAPSHOT_HEADER, SWEEP_HEADER,
};
pub use run::{
    noise_sweep, noise_sweep_over, run_experiment, run_experiment_with_workers, workers_from_env,
    Experiment, ExperimentStats, RunRecord, SweepRow, SWEEP_KINDS, WORKERS_ENV,
};
