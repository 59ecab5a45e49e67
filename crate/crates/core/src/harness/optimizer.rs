//! The evolutionary loop used as a plain optimizer on 2-D landscapes, with
//! every generation recorded for plotting.

use super::config::ExperimentConfig;
use super::output::SnapshotRow;
use super::run::{map_runs, workers_from_env, Experiment, ExperimentStats, RunRecord};
use crate::error::{Error, Result};
use crate::evolution::run_evolution_observed;

#[derive(Debug, Clone)]
pub struct LandscapeRun {
    pub experiment: Experiment,
    /// Snapshots of every evaluated generation, run by run.
    pub snapshots: Vec<SnapshotRow>,
}

pub fn run_landscape(cfg: &ExperimentConfig) -> Result<LandscapeRun> {
    run_landscape_with_workers(cfg, workers_from_env()?)
}

pub fn run_landscape_with_workers(
    cfg: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<LandscapeRun> {
    if !cfg.task.is_landscape() {
        return Err(Error::Config(format!(
            "landscape runs need task rastrigin or grid, got {}",
            cfg.task
        )));
    }
    cfg.validate()?;
    let (env, evolution) = cfg.environment()?;
    let per_run = map_runs(cfg.iterations, workers, |i| {
        let seed = cfg.base_seed.wrapping_add(i as u64);
        let mut rows = Vec::new();
        let out = run_evolution_observed(
            &env,
            &evolution,
            &cfg.mutation,
            &cfg.genome,
            seed,
            |view| {
                let pop = view.population;
                for (index, ind) in pop.individuals.iter().enumerate() {
                    let ([x, y], value) = env.landscape_point(ind).expect("landscape task");
                    rows.push(SnapshotRow {
                        iteration: i,
                        generation: pop.generation,
                        index,
                        origin: ind.origin().name(),
                        x,
                        y,
                        value,
                        fitness: ind.fitness().expect("observed after evaluation"),
                    });
                }
            },
        )?;
        let record = RunRecord {
            task: cfg.task,
            method: cfg.method,
            iteration: i,
            seed,
            solved: out.solved,
            end_generation: out.end_generation,
            best_fitness: out.best_fitness,
            node_count: out.best.network().wired_node_count(),
        };
        Ok((record, rows))
    })?;
    let mut records = Vec::with_capacity(per_run.len());
    let mut snapshots = Vec::new();
    for (record, rows) in per_run {
        records.push(record);
        snapshots.extend(rows);
    }
    let stats = ExperimentStats::from_records(&records);
    Ok(LandscapeRun {
        experiment: Experiment { records, stats },
        snapshots,
    })
}
