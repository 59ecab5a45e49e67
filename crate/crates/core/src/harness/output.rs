//! CSV results, key-value summaries and landscape snapshots.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::config::Task;
use super::run::{ExperimentStats, RunRecord, SweepRow};
use crate::error::{Error, Result};
use crate::evolution::Method;

pub const RESULTS_HEADER: [&str; 8] = [
    "task",
    "method",
    "iteration",
    "seed",
    "solved",
    "end_generation",
    "best_fitness",
    "node_count",
];

/// Marker written for statistics that are undefined (no solved runs).
pub const NOT_AVAILABLE: &str = "NA";

/// Sidecar path for the summary of `results`: same stem, `.summary`.
pub fn summary_path(results: &Path) -> PathBuf {
    results.with_extension("summary")
}

fn create_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    create_parent(path)?;
    csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| NOT_AVAILABLE.to_string(), |v| v.to_string())
}

/// Writes the per-run CSV and its summary sidecar.
pub fn write_results(records: &[RunRecord], stats: &ExperimentStats, path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(RESULTS_HEADER).map_err(|e| Error::csv(path, e))?;
    for r in records {
        w.write_record([
            r.task.name().to_string(),
            r.method.name().to_string(),
            r.iteration.to_string(),
            r.seed.to_string(),
            r.solved.to_string(),
            r.end_generation.to_string(),
            r.best_fitness.to_string(),
            r.node_count.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    write_summary(stats, &summary_path(path))
}

pub fn write_summary(stats: &ExperimentStats, path: &Path) -> Result<()> {
    create_parent(path)?;
    let text = format!(
        "runs = {}\nfail_rate = {}\navg_gen = {}\nstdev_gen = {}\nmean_node_count = {}\n",
        stats.runs,
        stats.fail_rate,
        opt(stats.avg_gen),
        opt(stats.stdev_gen),
        stats.mean_node_count
    );
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_summary(path: &Path) -> Result<ExperimentStats> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let origin = path.display().to_string();
    let mut fields = std::collections::HashMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.clone(),
            row: i + 1,
            column: 1,
            message: "expected 'key = value'".into(),
        })?;
        fields.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    let get = |key: &str| -> Result<Option<f64>> {
        let (row, v) = fields.get(key).ok_or_else(|| Error::Parse {
            path: origin.clone(),
            row: 0,
            column: 0,
            message: format!("missing key {key}"),
        })?;
        if v == NOT_AVAILABLE {
            return Ok(None);
        }
        v.parse().map(Some).map_err(|_| Error::Parse {
            path: origin.clone(),
            row: *row,
            column: 1,
            message: format!("{key}: '{v}' is not a number"),
        })
    };
    let required = |key: &str| -> Result<f64> {
        get(key)?.ok_or_else(|| Error::Parse {
            path: origin.clone(),
            row: 0,
            column: 0,
            message: format!("{key} is not available"),
        })
    };
    Ok(ExperimentStats {
        runs: required("runs")? as usize,
        fail_rate: required("fail_rate")?,
        avg_gen: get("avg_gen")?,
        stdev_gen: get("stdev_gen")?,
        mean_node_count: required("mean_node_count")?,
    })
}

/// Parses a CSV written by [`write_results`].
pub fn read_results(path: &Path) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let origin = path.display().to_string();
    let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    if header.iter().ne(RESULTS_HEADER) {
        return Err(Error::Parse {
            path: origin,
            row: 1,
            column: 1,
            message: format!("unexpected header '{}'", header.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = i + 2;
        let field = |c: usize| -> Result<&str> {
            row.get(c).ok_or_else(|| Error::Parse {
                path: origin.clone(),
                row: line,
                column: c + 1,
                message: "missing field".into(),
            })
        };
        let bad = |c: usize, msg: String| Error::Parse {
            path: origin.clone(),
            row: line,
            column: c + 1,
            message: msg,
        };
        macro_rules! parse {
            ($c:expr, $t:ty) => {
                field($c)?
                    .parse::<$t>()
                    .map_err(|e| bad($c, format!("{}: {e}", RESULTS_HEADER[$c])))?
            };
        }
        out.push(RunRecord {
            task: field(0)?.parse::<Task>().map_err(|e| bad(0, e.to_string()))?,
            method: field(1)?.parse::<Method>().map_err(|e| bad(1, e.to_string()))?,
            iteration: parse!(2, usize),
            seed: parse!(3, u64),
            solved: parse!(4, bool),
            end_generation: parse!(5, usize),
            best_fitness: parse!(6, f64),
            node_count: parse!(7, usize),
        });
    }
    Ok(out)
}

pub const SWEEP_HEADER: [&str; 8] = [
    "method",
    "kind",
    "level",
    "runs",
    "fail_rate",
    "avg_gen",
    "stdev_gen",
    "mean_node_count",
];

/// One row per `(kind, level)` cell of a noise sweep.
pub fn write_sweep(method: Method, rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SWEEP_HEADER).map_err(|e| Error::csv(path, e))?;
    for row in rows {
        let s = &row.experiment.stats;
        w.write_record([
            method.name().to_string(),
            row.kind.name().to_string(),
            row.level.to_string(),
            s.runs.to_string(),
            s.fail_rate.to_string(),
            opt(s.avg_gen),
            opt(s.stdev_gen),
            s.mean_node_count.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// One individual of one generation of a landscape run.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRow {
    pub iteration: usize,
    pub generation: usize,
    pub index: usize,
    pub origin: &'static str,
    pub x: f64,
    pub y: f64,
    /// Raw landscape value (function value or height).
    pub value: f64,
    pub fitness: f64,
}

pub const SNAPSHOT_HEADER: [&str; 8] = [
    "iteration",
    "generation",
    "index",
    "origin",
    "x",
    "y",
    "value",
    "fitness",
];

pub fn write_snapshots(rows: &[SnapshotRow], path: &Path) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(SNAPSHOT_HEADER).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.write_record([
            r.iteration.to_string(),
            r.generation.to_string(),
            r.index.to_string(),
            r.origin.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.value.to_string(),
            r.fitness.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
