//! Python bindings: genomes, operators, single runs and full experiments.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use retne_core::environments::{self, Action};
use retne_core::harness::{self, ExperimentConfig, ExperimentStats, Task};
use retne_core::{Activation, FeatureMatrix, GenomeConfig as CoreGenomeConfig, Method};

fn to_py(e: retne_core::Error) -> PyErr {
    match e {
        retne_core::Error::Io { .. } | retne_core::Error::Csv { .. } => {
            PyIOError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = retne_core::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

#[pyclass(name = "GenomeConfig", module = "retne", from_py_object)]
#[derive(Clone)]
struct GenomeConfig {
    inner: CoreGenomeConfig,
}

#[pymethods]
impl GenomeConfig {
    #[new]
    #[pyo3(signature = (n_in, n_out, hidden, activation = "sigmoid", weight_range = (-5.0, 5.0), bias_range = (-5.0, 5.0), connect_prob = 0.75))]
    fn new(
        n_in: usize,
        n_out: usize,
        hidden: usize,
        activation: &str,
        weight_range: (f64, f64),
        bias_range: (f64, f64),
        connect_prob: f64,
    ) -> PyResult<Self> {
        let activation = match activation.to_ascii_lowercase().as_str() {
            "sigmoid" => Activation::Sigmoid,
            "relu" => Activation::Relu,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown activation '{other}' (expected sigmoid or relu)"
                )))
            }
        };
        let mut inner = CoreGenomeConfig::for_arity(n_in, n_out, hidden, activation);
        inner.weight_range = retne_core::Interval::new(weight_range.0, weight_range.1);
        inner.bias_range = retne_core::Interval::new(bias_range.0, bias_range.1);
        inner.connect_prob = connect_prob;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }

    #[getter]
    fn n_in(&self) -> usize {
        self.inner.n_in
    }

    #[getter]
    fn n_out(&self) -> usize {
        self.inner.n_out
    }

    fn __repr__(&self) -> String {
        format!(
            "GenomeConfig(n_in={}, n_out={}, m={})",
            self.inner.n_in, self.inner.n_out, self.inner.m
        )
    }
}

/// A decoded genome with optional fitness.
#[pyclass(name = "Individual", module = "retne", from_py_object)]
#[derive(Clone)]
struct Individual {
    inner: retne_core::Individual,
    config: CoreGenomeConfig,
}

#[pymethods]
impl Individual {
    /// Decodes an `m x (m + 1)` matrix given as nested lists.
    #[new]
    fn new(matrix: Vec<Vec<f64>>, config: &GenomeConfig) -> PyResult<Self> {
        let f = FeatureMatrix::from_rows(&matrix).map_err(to_py)?;
        let inner = retne_core::create(f, &config.inner).map_err(to_py)?;
        Ok(Self {
            inner,
            config: config.inner.clone(),
        })
    }

    #[staticmethod]
    fn random(config: &GenomeConfig, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = retne_core::random_feature_matrix(&config.inner, &mut rng);
        let inner = retne_core::create(f, &config.inner).map_err(to_py)?;
        Ok(Self {
            inner,
            config: config.inner.clone(),
        })
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<f64>> {
        self.inner.matrix().rows()
    }

    #[getter]
    fn fitness(&self) -> Option<f64> {
        self.inner.fitness()
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.network().wired_node_count()
    }

    fn forward(&self, inputs: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.network().forward(&inputs).map_err(to_py)
    }

    /// Local mutation with the default operator rates.
    #[pyo3(signature = (seed, sigma = 0.5))]
    fn mutate(&self, seed: u64, sigma: f64) -> PyResult<Self> {
        let mcfg = retne_core::MutationConfig {
            weight_perturb_sigma: sigma,
            ..Default::default()
        };
        mcfg.validate().map_err(to_py)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inner =
            retne_core::mutate_near(&self.inner, &mcfg, &self.config, &mut rng).map_err(to_py)?;
        Ok(Self {
            inner,
            config: self.config.clone(),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "Individual(m={}, fitness={:?})",
            self.config.m,
            self.inner.fitness()
        )
    }
}

#[pyfunction]
fn distance(a: &Individual, b: &Individual) -> PyResult<f64> {
    retne_core::distance(a.inner.matrix(), b.inner.matrix()).map_err(to_py)
}

#[pyfunction]
fn binary_combine(a: &Individual, b: &Individual) -> PyResult<Individual> {
    let inner =
        retne_core::binary_combine(a.inner.matrix(), b.inner.matrix(), &a.config).map_err(to_py)?;
    Ok(Individual {
        inner,
        config: a.config.clone(),
    })
}

#[pyfunction]
fn golden_combine(a: &Individual, b: &Individual) -> PyResult<Individual> {
    let inner =
        retne_core::golden_combine(a.inner.matrix(), b.inner.matrix(), &a.config).map_err(to_py)?;
    Ok(Individual {
        inner,
        config: a.config.clone(),
    })
}

/// `4 - SSE` of a 2-input gate network (`imply`, `nand`, `nor`, `xor`).
#[pyfunction]
fn gate_fitness(individual: &Individual, gate: &str) -> PyResult<f64> {
    let gate: environments::Gate = parse(gate)?;
    environments::gate_fitness(
        individual.inner.network(),
        gate,
        environments::GateError::default(),
    )
    .map_err(to_py)
}

#[pyfunction]
fn rastrigin(x: Vec<f64>) -> f64 {
    environments::rastrigin(&x)
}

/// One Euler step of the default cart-pole; `push_right` picks the force.
#[pyfunction]
fn cartpole_step(state: [f64; 4], push_right: bool) -> [f64; 4] {
    let action = if push_right { Action::Right } else { Action::Left };
    environments::cartpole_step(state, action, &environments::CartPoleConfig::default())
}

fn preset(task: &str, method: &str, config: Option<PathBuf>) -> PyResult<ExperimentConfig> {
    let task: Task = parse(task)?;
    let method: Method = parse(method)?;
    match config {
        Some(path) => ExperimentConfig::from_file(path, Some(task), Some(method)).map_err(to_py),
        None => Ok(ExperimentConfig::preset(task, method)),
    }
}

fn stats_dict<'py>(py: Python<'py>, s: &ExperimentStats) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("runs", s.runs)?;
    d.set_item("fail_rate", s.fail_rate)?;
    d.set_item("avg_gen", s.avg_gen)?;
    d.set_item("stdev_gen", s.stdev_gen)?;
    d.set_item("mean_node_count", s.mean_node_count)?;
    Ok(d)
}

/// Single evolutionary run of a task preset.
#[pyfunction]
#[pyo3(signature = (task, method = "bi-neat", seed = 0, max_generations = None, config = None))]
fn run_evolution<'py>(
    py: Python<'py>,
    task: &str,
    method: &str,
    seed: u64,
    max_generations: Option<usize>,
    config: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = preset(task, method, config)?;
    if let Some(g) = max_generations {
        cfg.evolution.max_generations = g;
    }
    cfg.validate().map_err(to_py)?;
    let (env, evolution) = cfg.environment().map_err(to_py)?;
    let out = py
        .detach(|| {
            retne_core::run_evolution(&env, &evolution, &cfg.mutation, &cfg.genome, seed)
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("solved", out.solved)?;
    d.set_item("end_generation", out.end_generation)?;
    d.set_item("best_fitness", out.best_fitness)?;
    d.set_item("node_count", out.best.network().wired_node_count())?;
    d.set_item(
        "best",
        Individual {
            inner: out.best,
            config: cfg.genome.clone(),
        },
    )?;
    Ok(d)
}

/// Repeated runs; returns `{"stats": {...}, "records": [...]}` and writes
/// the CSV plus summary when `out` is given.
#[pyfunction]
#[pyo3(signature = (task, method = "bi-neat", iterations = 10, base_seed = 0, config = None, out = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    task: &str,
    method: &str,
    iterations: usize,
    base_seed: u64,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = preset(task, method, config)?;
    cfg.iterations = iterations;
    cfg.base_seed = base_seed;
    let exp = py
        .detach(|| harness::run_experiment(&cfg))
        .map_err(to_py)?;
    if let Some(path) = out {
        harness::write_results(&exp.records, &exp.stats, &path).map_err(to_py)?;
    }
    let records: Vec<Bound<'py, PyDict>> = exp
        .records
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("iteration", r.iteration)?;
            d.set_item("seed", r.seed)?;
            d.set_item("solved", r.solved)?;
            d.set_item("end_generation", r.end_generation)?;
            d.set_item("best_fitness", r.best_fitness)?;
            d.set_item("node_count", r.node_count)?;
            Ok(d)
        })
        .collect::<PyResult<_>>()?;
    let d = PyDict::new(py);
    d.set_item("stats", stats_dict(py, &exp.stats)?)?;
    d.set_item("records", records)?;
    Ok(d)
}

#[pymodule]
fn retne(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<GenomeConfig>()?;
    m.add_class::<Individual>()?;
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(binary_combine, m)?)?;
    m.add_function(wrap_pyfunction!(golden_combine, m)?)?;
    m.add_function(wrap_pyfunction!(gate_fitness, m)?)?;
    m.add_function(wrap_pyfunction!(rastrigin, m)?)?;
    m.add_function(wrap_pyfunction!(cartpole_step, m)?)?;
    m.add_function(wrap_pyfunction!(run_evolution, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("GOLDEN_MAJOR", retne_core::variation::GOLDEN_MAJOR)?;
    m.add("GOLDEN_MINOR", retne_core::variation::GOLDEN_MINOR)?;
    Ok(())
}
