//! Repeated independent runs and their summary statistics.

use rayon::prelude::*;

use super::config::{ExperimentConfig, Task};
use crate::environments::NoiseKind;
use crate::error::{Error, Result};
use crate::evolution::{run_evolution, Method, RunOutcome};

/// Environment variable that sets the worker count; `0` runs sequentially.
pub const WORKERS_ENV: &str = "RETNE_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub task: Task,
    pub method: Method,
    pub iteration: usize,
    pub seed: u64,
    pub solved: bool,
    pub end_generation: usize,
    pub best_fitness: f64,
    /// Nodes of the best network touched by at least one connection.
    pub node_count: usize,
}

impl RunRecord {
    fn from_outcome(cfg: &ExperimentConfig, iteration: usize, seed: u64, out: &RunOutcome) -> Self {
        Self {
            task: cfg.task,
            method: cfg.method,
            iteration,
            seed,
            solved: out.solved,
            end_generation: out.end_generation,
            best_fitness: out.best_fitness,
            node_count: out.best.network().wired_node_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentStats {
    pub runs: usize,
    pub fail_rate: f64,
    /// Mean end generation over solved runs; `None` when nothing solved.
    pub avg_gen: Option<f64>,
    /// Sample standard deviation over solved runs (0 for a single run).
    pub stdev_gen: Option<f64>,
    pub mean_node_count: f64,
}

impl ExperimentStats {
    pub fn from_records(records: &[RunRecord]) -> Self {
        let runs = records.len();
        let solved: Vec<f64> = records
            .iter()
            .filter(|r| r.solved)
            .map(|r| r.end_generation as f64)
            .collect();
        let fail_rate = if runs == 0 {
            0.0
        } else {
            (runs - solved.len()) as f64 / runs as f64
        };
        let (avg_gen, stdev_gen) = match solved.len() {
            0 => (None, None),
            1 => (Some(solved[0]), Some(0.0)),
            n => {
                let mean = solved.iter().sum::<f64>() / n as f64;
                let ss: f64 = solved.iter().map(|g| (g - mean) * (g - mean)).sum();
                (Some(mean), Some((ss / (n - 1) as f64).sqrt()))
            }
        };
        let mean_node_count = if runs == 0 {
            0.0
        } else {
            records.iter().map(|r| r.node_count as f64).sum::<f64>() / runs as f64
        };
        Self {
            runs,
            fail_rate,
            avg_gen,
            stdev_gen,
            mean_node_count,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub records: Vec<RunRecord>,
    pub stats: ExperimentStats,
}

/// Worker count from `RETNE_WORKERS`; `None` means rayon's default.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(s) => s.trim().parse::<usize>().map(Some).map_err(|_| {
            Error::Config(format!("{WORKERS_ENV} = '{s}' is not a non-negative integer"))
        }),
        Err(_) => Ok(None),
    }
}

/// Runs `f(i)` for `i in 0..n`, results in index order.
pub(crate) fn map_runs<T, F>(n: usize, workers: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match workers {
        Some(0) => (0..n).map(f).collect(),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {k} workers: {e}")))?
            .install(|| (0..n).into_par_iter().map(&f).collect()),
        None => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Runs every iteration with the worker count taken from `RETNE_WORKERS`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Experiment> {
    run_experiment_with_workers(cfg, workers_from_env()?)
}

pub fn run_experiment_with_workers(
    cfg: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<Experiment> {
    cfg.validate()?;
    let (env, evolution) = cfg.environment()?;
    let records = map_runs(cfg.iterations, workers, |i| {
        let seed = cfg.base_seed.wrapping_add(i as u64);
        let out = run_evolution(&env, &evolution, &cfg.mutation, &cfg.genome, seed)?;
        Ok(RunRecord::from_outcome(cfg, i, seed, &out))
    })?;
    let stats = ExperimentStats::from_records(&records);
    Ok(Experiment { records, stats })
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub kind: NoiseKind,
    pub level: f64,
    pub experiment: Experiment,
}

pub const SWEEP_KINDS: [NoiseKind; 2] = [NoiseKind::Gaussian, NoiseKind::Reverse];

/// Noise sweep over both kinds and the configured levels.
pub fn noise_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    noise_sweep_over(cfg, &SWEEP_KINDS, &cfg.noise.sweep_levels(), workers_from_env()?)
}

/// One experiment per `(kind, level)`, kinds outermost. Every cell reuses
/// the same seeds so levels differ only in the noise.
pub fn noise_sweep_over(
    cfg: &ExperimentConfig,
    kinds: &[NoiseKind],
    levels: &[f64],
    workers: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if cfg.task != Task::CartPoleNoise {
        return Err(Error::Config(format!(
            "noise sweep needs task cartpole_noise, got {}",
            cfg.task
        )));
    }
    cfg.validate()?;
    let mut rows = Vec::with_capacity(kinds.len() * levels.len());
    for &kind in kinds {
        for &level in levels {
            let mut cell = cfg.clone();
            cell.noise.kind = kind;
            cell.noise.level = level;
            let experiment = run_experiment_with_workers(&cell, workers)?;
            rows.push(SweepRow {
                kind,
                level,
                experiment,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(solved: bool, end_generation: usize, node_count: usize) -> RunRecord {
        RunRecord {
            task: Task::Xor,
            method: Method::BiNeat,
            iteration: 0,
            seed: 0,
            solved,
            end_generation,
            best_fitness: 0.0,
            node_count,
        }
    }

    #[test]
    fn stats_over_solved_runs_only() {
        let recs = [record(true, 10, 4), record(true, 20, 6), record(false, 500, 8)];
        let s = ExperimentStats::from_records(&recs);
        assert_eq!(s.runs, 3);
        assert!((s.fail_rate - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.avg_gen, Some(15.0));
        assert!((s.stdev_gen.unwrap() - 50f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.mean_node_count, 6.0);
    }

    #[test]
    fn single_and_empty_solved_sets() {
        let one = ExperimentStats::from_records(&[record(true, 7, 3)]);
        assert_eq!((one.fail_rate, one.avg_gen, one.stdev_gen), (0.0, Some(7.0), Some(0.0)));
        let none = ExperimentStats::from_records(&[record(false, 5, 3), record(false, 5, 3)]);
        assert_eq!((none.fail_rate, none.avg_gen, none.stdev_gen), (1.0, None, None));
    }

    #[test]
    fn sweep_rejects_other_tasks() {
        let cfg = ExperimentConfig::preset(Task::Xor, Method::Neat);
        assert!(noise_sweep_over(&cfg, &SWEEP_KINDS, &[0.0], Some(0)).is_err());
    }
}
