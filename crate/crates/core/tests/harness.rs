use std::fs;
use std::process::Command;

use retne_core::environments::NoiseKind;
use retne_core::harness::*;
use retne_core::Method;

const BIN: &str = env!("CARGO_BIN_EXE_retne");

fn quick(task: Task, method: Method, iterations: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(task, method);
    cfg.iterations = iterations;
    cfg.base_seed = 42;
    cfg
}

#[test]
fn results_round_trip_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(Task::Nor, Method::GsNeat, 6);
    cfg.evolution.max_generations = 4;
    let exp = run_experiment_with_workers(&cfg, Some(0)).unwrap();
    let path = dir.path().join("nested/out.csv");
    write_results(&exp.records, &exp.stats, &path).unwrap();

    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert_eq!(text.lines().next().unwrap(), RESULTS_HEADER.join(","));
    assert_eq!(read_results(&path).unwrap(), exp.records);

    let summary = read_summary(&summary_path(&path)).unwrap();
    assert_eq!(summary, exp.stats);
    assert_eq!(ExperimentStats::from_records(&read_results(&path).unwrap()), summary);
    let failures = summary.fail_rate * summary.runs as f64;
    assert_eq!(failures, failures.round());
}

#[test]
fn empty_and_single_record_files() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    write_results(&[], &ExperimentStats::from_records(&[]), &empty).unwrap();
    assert_eq!(fs::read_to_string(&empty).unwrap().lines().count(), 1);
    assert!(read_results(&empty).unwrap().is_empty());

    let one = dir.path().join("one.csv");
    let cfg = quick(Task::Imply, Method::BiNeat, 1);
    let exp = run_experiment_with_workers(&cfg, Some(0)).unwrap();
    assert!(exp.stats.fail_rate == 0.0 || exp.stats.fail_rate == 1.0);
    if exp.stats.fail_rate == 0.0 {
        assert_eq!(exp.stats.stdev_gen, Some(0.0));
        assert!(exp.records[0].best_fitness >= 3.999);
    }
    write_results(&exp.records, &exp.stats, &one).unwrap();
    assert_eq!(fs::read_to_string(&one).unwrap().lines().count(), 2);
}

#[test]
fn unsolved_runs_report_not_available() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = quick(Task::Xor, Method::Neat, 3);
    cfg.evolution.max_generations = 1;
    let exp = run_experiment_with_workers(&cfg, Some(0)).unwrap();
    assert_eq!(exp.stats.fail_rate, 1.0);
    assert_eq!(exp.stats.avg_gen, None);
    assert!(exp.records.iter().all(|r| r.end_generation == 1 && !r.solved));
    let path = dir.path().join("fail.csv");
    write_results(&exp.records, &exp.stats, &path).unwrap();
    let text = fs::read_to_string(summary_path(&path)).unwrap();
    assert!(text.contains("avg_gen = NA"), "{text}");
    assert_eq!(read_summary(&summary_path(&path)).unwrap(), exp.stats);
}

#[test]
fn output_is_identical_for_any_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    for (task, method) in [(Task::Xor, Method::BiNeat), (Task::CartPole, Method::GsNeat)] {
        let mut cfg = quick(task, method, 8);
        cfg.evolution.max_generations = 25;
        let mut files = Vec::new();
        for workers in [Some(0), Some(1), Some(3), None] {
            let exp = run_experiment_with_workers(&cfg, workers).unwrap();
            let path = dir.path().join(format!("{task}_{workers:?}.csv"));
            write_results(&exp.records, &exp.stats, &path).unwrap();
            files.push((fs::read(&path).unwrap(), fs::read(summary_path(&path)).unwrap()));
        }
        assert!(files.windows(2).all(|w| w[0] == w[1]), "{task} differs across workers");
    }
}

#[test]
fn config_file_keys() {
    let text = r#"
benchmark_task = "CartPole v0"
method = "gs_neat"
iteration = 7
evolution_size = 20
activation = "relu"
episode_steps = 300
episode_generation = 2
fitness_threshold = 0.99
normal_maximum = 0.2
normal_minimum = 0.1
dilution_coefficient_in_reverse = "50%"
peak_in_gaussian = 0.3
weight_range = [-2, 2]
hidden_nodes = 3
noise_kind = "reverse"
noise_level = 0.1
"#;
    let cfg = ExperimentConfig::from_toml_str(text, None, None).unwrap();
    assert_eq!(cfg.task, Task::CartPole);
    assert_eq!(cfg.method, Method::GsNeat);
    assert_eq!(cfg.evolution.method, Method::GsNeat);
    assert_eq!(cfg.iterations, 7);
    assert_eq!(cfg.evolution.population_size, 5);
    assert_eq!((cfg.cartpole.episode_steps, cfg.cartpole.episode_generation), (300, 2));
    assert_eq!(cfg.evolution.fitness_threshold, 0.99);
    assert_eq!(cfg.noise.reverse_dilution, 0.5);
    assert_eq!(cfg.noise.sweep_levels(), vec![0.0, 0.1, 0.2, 0.3]);
    assert_eq!((cfg.genome.weight_range.lo, cfg.genome.weight_range.hi), (-2.0, 2.0));
    assert_eq!(cfg.genome.m, 4 + 1 + 3);
    assert_eq!(cfg.noise.kind, NoiseKind::Reverse);
    cfg.validate().unwrap();

    let overridden = ExperimentConfig::from_toml_str(text, Some(Task::CartPoleNoise), Some(Method::Neat)).unwrap();
    assert_eq!((overridden.task, overridden.method), (Task::CartPoleNoise, Method::Neat));
}

#[test]
fn config_file_errors() {
    let err = ExperimentConfig::from_toml_str("population = 3", None, None).unwrap_err().to_string();
    assert!(err.contains("unknown key 'population'"), "{err}");
    assert!(ExperimentConfig::from_toml_str("iteration = \"many\"", None, None).is_err());
    assert!(ExperimentConfig::from_toml_str("benchmark_task = \"pong\"", None, None).is_err());
    assert!(ExperimentConfig::from_toml_str("evolution_size = 6\npopulation_size = 3", None, None).is_err());
    assert!(ExperimentConfig::from_toml_str("activation = \"tanh\"", None, None).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "iteration = 0\n").unwrap();
    let cfg = ExperimentConfig::from_file(&path, None, None).unwrap();
    assert!(run_experiment_with_workers(&cfg, Some(0)).is_err());
    assert!(ExperimentConfig::from_file(dir.path().join("missing.toml"), None, None).is_err());
}

#[test]
fn infeasible_initial_distance_aborts_before_running() {
    let mut cfg = quick(Task::Xor, Method::BiNeat, 3);
    cfg.evolution.initial_distance = 1e6;
    cfg.evolution.minimum_distance = 0.0;
    let err = run_experiment_with_workers(&cfg, Some(0)).unwrap_err().to_string();
    assert!(err.contains("d_i"), "{err}");
}

#[test]
fn presets_are_valid() {
    for task in Task::ALL {
        for method in Method::ALL {
            let cfg = ExperimentConfig::preset(task, method);
            cfg.validate().unwrap();
            assert_eq!(cfg.task.name().parse::<Task>().unwrap(), task);
        }
    }
    let gate = ExperimentConfig::preset(Task::Xor, Method::Neat);
    assert_eq!((gate.evolution.population_size, gate.genome.m), (12, 10));
    let cart = ExperimentConfig::preset(Task::CartPole, Method::Neat);
    assert_eq!((cart.evolution.population_size, cart.genome.m), (3, 10));
    assert_eq!(cart.evolution.fitness_threshold, 0.999);
}

#[test]
fn sweep_at_zero_noise_equals_plain_cartpole() {
    let mut cfg = quick(Task::CartPoleNoise, Method::BiNeat, 4);
    cfg.evolution.max_generations = 20;
    let rows = noise_sweep_over(&cfg, &SWEEP_KINDS, &[0.0], Some(0)).unwrap();
    assert_eq!(rows.len(), 2);
    let mut plain = cfg.clone();
    plain.noise.kind = NoiseKind::None;
    plain.noise.level = 0.0;
    let base = run_experiment_with_workers(&plain, Some(0)).unwrap();
    for row in &rows {
        assert_eq!(row.experiment.records, base.records);
    }

    let levels = cfg.noise.sweep_levels();
    let rows = noise_sweep_over(&cfg, &SWEEP_KINDS, &levels, Some(0)).unwrap();
    assert_eq!(rows.len(), SWEEP_KINDS.len() * levels.len());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    write_sweep(cfg.method, &rows, &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 1 + rows.len());
}

#[test]
fn landscape_snapshots_cover_every_generation() {
    let mut cfg = quick(Task::Grid, Method::BiNeat, 3);
    cfg.evolution.max_generations = 10;
    let run = run_landscape_with_workers(&cfg, Some(0)).unwrap();
    for rec in &run.experiment.records {
        let last = run
            .snapshots
            .iter()
            .filter(|s| s.iteration == rec.iteration)
            .map(|s| s.generation)
            .max()
            .unwrap();
        assert_eq!(last, if rec.solved { rec.end_generation } else { rec.end_generation - 1 });
    }
    assert!(run.snapshots.iter().all(|s| (0.0..=19.0).contains(&s.x) && (0.0..=19.0).contains(&s.y)));
    assert!(run_landscape_with_workers(&quick(Task::Xor, Method::BiNeat, 1), Some(0)).is_err());
}

#[test]
fn cli_run_writes_one_row_per_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let status = Command::new(BIN)
        .args(["run", "--task", "xor", "--method", "bi-neat", "--iterations", "5", "--seed", "1", "--out"])
        .arg(&out)
        .env("RETNE_WORKERS", "0")
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 6);
    assert!(summary_path(&out).exists());
}

#[test]
fn cli_rejects_unknown_values_and_flags() {
    let out = Command::new(BIN).args(["run", "--task", "nosuch"]).output().unwrap();
    assert!(!out.status.success());
    let msg = String::from_utf8_lossy(&out.stderr);
    for task in Task::ALL {
        assert!(msg.contains(task.name()), "{msg}");
    }

    let out = Command::new(BIN).args(["run", "--method", "hyperneat"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("bi-neat"));

    let out = Command::new(BIN).args(["run", "--frobnicate"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "nonsense_key = 1\n").unwrap();
    let out = Command::new(BIN).args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonsense_key"));
}

#[test]
fn cli_landscape_reaches_rastrigin_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("snap.csv");
    let status = Command::new(BIN)
        .args(["landscape", "--task", "rastrigin", "--method", "gs-neat", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), SNAPSHOT_HEADER);
    let mut best: std::collections::BTreeMap<usize, (usize, f64)> = Default::default();
    for row in rdr.records() {
        let row = row.unwrap();
        let it: usize = row[0].parse().unwrap();
        let gen: usize = row[1].parse().unwrap();
        let value: f64 = row[6].parse().unwrap();
        let e = best.entry(it).or_insert((gen, f64::INFINITY));
        if gen > e.0 {
            *e = (gen, value);
        } else if gen == e.0 {
            e.1 = e.1.min(value);
        }
    }
    let runs = best.len();
    let hits = best.values().filter(|(_, v)| *v <= 0.01).count();
    assert_eq!(runs, 50);
    assert!(hits * 10 >= runs * 9, "{hits}/{runs}");
}

#[test]
fn cli_sweep_with_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    fs::write(&cfg, "iteration = 2\nmax_generations = 5\n").unwrap();
    let out = dir.path().join("sweep.csv");
    let status = Command::new(BIN)
        .args(["sweep", "--method", "neat", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 2 * 4);
}
