//! Experiment presets and the flat key-value config file.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use toml::{Table, Value};

use crate::environments::{
    load_grid_landscape, CartPoleConfig, CartPoleEnv, Gate, GateEnv, GateError, GridEnv,
    GridLandscape, NoiseConfig, NoiseKind, RastriginEnv,
};
use crate::error::{Error, Result};
use crate::evolution::{population_for_budget, Environment, EvolutionConfig, Method};
use crate::genome::{Activation, GenomeConfig, Individual, Interval};
use crate::variation::MutationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Imply,
    Nand,
    Nor,
    Xor,
    CartPole,
    CartPoleNoise,
    Rastrigin,
    Grid,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::Imply,
        Task::Nand,
        Task::Nor,
        Task::Xor,
        Task::CartPole,
        Task::CartPoleNoise,
        Task::Rastrigin,
        Task::Grid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::Imply => "imply",
            Task::Nand => "nand",
            Task::Nor => "nor",
            Task::Xor => "xor",
            Task::CartPole => "cartpole",
            Task::CartPoleNoise => "cartpole_noise",
            Task::Rastrigin => "rastrigin",
            Task::Grid => "grid",
        }
    }

    pub fn gate(self) -> Option<Gate> {
        match self {
            Task::Imply => Some(Gate::Imply),
            Task::Nand => Some(Gate::Nand),
            Task::Nor => Some(Gate::Nor),
            Task::Xor => Some(Gate::Xor),
            _ => None,
        }
    }

    pub fn is_landscape(self) -> bool {
        matches!(self, Task::Rastrigin | Task::Grid)
    }

    pub fn is_cartpole(self) -> bool {
        matches!(self, Task::CartPole | Task::CartPoleNoise)
    }

    /// `(n_in, n_out)` of the genomes this task scores.
    pub fn arity(self) -> (usize, usize) {
        match self {
            Task::Imply | Task::Nand | Task::Nor | Task::Xor => (2, 1),
            Task::CartPole | Task::CartPoleNoise => (4, 1),
            Task::Rastrigin | Task::Grid => (0, 2),
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .to_ascii_lowercase()
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect();
        let task = match key.as_str() {
            "cartpolev0" | "cartpolev1" => Some(Task::CartPole),
            _ => Task::ALL
                .into_iter()
                .find(|t| t.name().replace('_', "") == key),
        };
        task.ok_or_else(|| {
            let names: Vec<&str> = Task::ALL.iter().map(|t| t.name()).collect();
            Error::Config(format!(
                "unknown task '{s}' (expected one of: {})",
                names.join(", ")
            ))
        })
    }
}

/// Everything needed to repeat one (task, method) experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: Task,
    pub method: Method,
    /// Independent runs; run `i` uses seed `base_seed + i`.
    pub iterations: usize,
    pub base_seed: u64,
    pub evolution: EvolutionConfig,
    pub genome: GenomeConfig,
    pub mutation: MutationConfig,
    pub cartpole: CartPoleConfig,
    pub noise: NoiseConfig,
    pub gate_error: GateError,
    /// Height map for the grid task; the built-in synthetic terrain when unset.
    pub grid_path: Option<PathBuf>,
    /// Grid threshold as a fraction of the height range below the summit.
    /// Ignored once `fitness_threshold` is set explicitly.
    pub grid_tolerance: Option<f64>,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn preset(task: Task, method: Method) -> Self {
        let mut evolution = EvolutionConfig {
            method,
            ..EvolutionConfig::default()
        };
        let mut mutation = MutationConfig::default();
        let mut cartpole = CartPoleConfig::default();
        let mut noise = NoiseConfig::default();
        let mut grid_tolerance = None;
        let mut iterations = 1000;

        let genome = match task {
            Task::Imply | Task::Nand | Task::Nor | Task::Xor => {
                evolution.population_size = population_for_budget(132);
                evolution.fitness_threshold = 3.999;
                mutation.replace_prob = 0.0;
                mutation.weight_perturb_sigma = 1.0;
                GenomeConfig::for_arity(2, 1, 7, Activation::Sigmoid)
            }
            Task::CartPole | Task::CartPoleNoise => {
                evolution.population_size = population_for_budget(6);
                evolution.fitness_threshold = 0.999;
                if task == Task::CartPoleNoise {
                    cartpole.episode_steps = 300;
                    cartpole.episode_generation = 2;
                    noise.kind = NoiseKind::Gaussian;
                    noise.level = noise.normal_min;
                }
                GenomeConfig::for_arity(4, 1, 5, Activation::Relu)
            }
            Task::Rastrigin | Task::Grid => {
                iterations = 50;
                evolution.population_size = population_for_budget(20);
                evolution.max_generations = 200;
                let bounds = if task == Task::Rastrigin {
                    evolution.fitness_threshold = -0.01;
                    evolution.initial_distance = 1.0;
                    evolution.minimum_distance = 1e-3;
                    mutation.weight_perturb_sigma = 0.1;
                    Interval::new(-5.12, 5.12)
                } else {
                    grid_tolerance = Some(1e-3);
                    evolution.initial_distance = 0.1;
                    evolution.minimum_distance = 1e-4;
                    mutation.weight_perturb_sigma = 0.01;
                    Interval::new(0.0, 1.0)
                };
                GenomeConfig::position(2, bounds)
            }
        };

        Self {
            task,
            method,
            iterations,
            base_seed: 0,
            evolution,
            genome,
            mutation,
            cartpole,
            noise,
            gate_error: GateError::default(),
            grid_path: None,
            grid_tolerance,
            output_path: None,
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self.evolution.method = method;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iteration must be at least 1".into()));
        }
        if self.evolution.method != self.method {
            return Err(Error::Config(format!(
                "method {} disagrees with evolution method {}",
                self.method, self.evolution.method
            )));
        }
        self.evolution.validate()?;
        self.genome.validate()?;
        self.mutation.validate()?;
        self.noise.validate()?;
        if self.task.is_cartpole() {
            self.cartpole.validate()?;
        }
        let (n_in, n_out) = self.task.arity();
        if self.genome.n_in != n_in || self.genome.n_out != n_out {
            return Err(Error::Config(format!(
                "task {} needs genomes with {n_in} inputs and {n_out} outputs, config has {} and {}",
                self.task, self.genome.n_in, self.genome.n_out
            )));
        }
        if self.task.is_landscape() && !self.genome.bias_only {
            return Err(Error::Config(format!(
                "task {} needs a position genome",
                self.task
            )));
        }
        let diameter = self.genome.diameter();
        if self.evolution.initial_distance > diameter {
            return Err(Error::Config(format!(
                "d_i = {} exceeds the largest possible genome distance {diameter}",
                self.evolution.initial_distance
            )));
        }
        if let Some(t) = self.grid_tolerance {
            if !(t >= 0.0) {
                return Err(Error::Config(format!("grid_tolerance = {t} must be >= 0")));
            }
        }
        Ok(())
    }

    /// Builds the task environment and settles the fitness threshold.
    pub fn environment(&self) -> Result<(TaskEnv, EvolutionConfig)> {
        let mut evolution = self.evolution.clone();
        let env = match self.task {
            Task::Imply | Task::Nand | Task::Nor | Task::Xor => TaskEnv::Gate(GateEnv {
                gate: self.task.gate().expect("gate task"),
                metric: self.gate_error,
            }),
            Task::CartPole | Task::CartPoleNoise => TaskEnv::CartPole(CartPoleEnv {
                config: self.cartpole.clone(),
                noise: self.noise.clone(),
            }),
            Task::Rastrigin => TaskEnv::Rastrigin(RastriginEnv { dim: 2 }),
            Task::Grid => {
                let grid = match &self.grid_path {
                    Some(path) => load_grid_landscape(path)?,
                    None => GridLandscape::synthetic_peaks(),
                };
                if let Some(tol) = self.grid_tolerance {
                    let (hi, lo) = (grid.max_height(), grid.min_height());
                    evolution.fitness_threshold = hi - tol * (hi - lo);
                }
                TaskEnv::Grid(GridEnv { grid })
            }
        };
        Ok((env, evolution))
    }

    /// Reads a config file. `task` and `method` override the file's
    /// `benchmark_task` and `method` keys when given.
    pub fn from_file(
        path: impl AsRef<Path>,
        task: Option<Task>,
        method: Option<Method>,
    ) -> Result<Self> {
        let path = path.as_ref();
        Self::from_file_or(path, task, method, Task::Xor)
    }

    /// Like [`from_file`](Self::from_file), falling back to `default_task`
    /// when neither the caller nor the file names one.
    pub fn from_file_or(
        path: impl AsRef<Path>,
        task: Option<Task>,
        method: Option<Method>,
        default_task: Task,
    ) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_with_default(&text, task, method, default_task)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml_str(text: &str, task: Option<Task>, method: Option<Method>) -> Result<Self> {
        Self::parse_with_default(text, task, method, Task::Xor)
    }

    fn parse_with_default(
        text: &str,
        task: Option<Task>,
        method: Option<Method>,
        default_task: Task,
    ) -> Result<Self> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let task = match (task, table.get("benchmark_task")) {
            (Some(t), _) => t,
            (None, Some(v)) => as_str("benchmark_task", v)?.parse()?,
            (None, None) => default_task,
        };
        let method = match (method, table.get("method")) {
            (Some(m), _) => m,
            (None, Some(v)) => as_str("method", v)?.parse()?,
            (None, None) => Method::BiNeat,
        };
        let mut cfg = Self::preset(task, method);
        if table.contains_key("evolution_size") && table.contains_key("population_size") {
            return Err(Error::Config(
                "set either evolution_size or population_size, not both".into(),
            ));
        }
        for (key, value) in &table {
            cfg.apply(key, value)?;
        }
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, v: &Value) -> Result<()> {
        match key {
            "benchmark_task" | "method" => {}
            "iteration" => self.iterations = as_count(key, v)?,
            "base_seed" => self.base_seed = as_u64(key, v)?,
            "output_path" => self.output_path = Some(PathBuf::from(as_str(key, v)?)),

            "evolution_size" => {
                self.evolution.population_size = population_for_budget(as_count(key, v)?)
            }
            "population_size" => self.evolution.population_size = as_count(key, v)?,
            "initial_distance" => self.evolution.initial_distance = as_f64(key, v)?,
            "minimum_distance" => self.evolution.minimum_distance = as_f64(key, v)?,
            "rho_threshold" => self.evolution.rho_threshold = as_f64(key, v)?,
            "fitness_threshold" => {
                self.evolution.fitness_threshold = as_f64(key, v)?;
                self.grid_tolerance = None;
            }
            "max_generations" => self.evolution.max_generations = as_count(key, v)?,

            "activation" => {
                self.genome.activation = match as_str(key, v)?.to_ascii_lowercase().as_str() {
                    "sigmoid" => Activation::Sigmoid,
                    "relu" => Activation::Relu,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown activation '{other}' (expected sigmoid or relu)"
                        )))
                    }
                }
            }
            "hidden_nodes" => {
                let hidden = as_count(key, v)?;
                self.genome.m = self.genome.n_in + self.genome.n_out + hidden;
            }
            "weight_range" => self.genome.weight_range = as_interval(key, v)?,
            "bias_range" => self.genome.bias_range = as_interval(key, v)?,
            "connect_prob" => self.genome.connect_prob = as_f64(key, v)?,

            "weight_perturb_sigma" => self.mutation.weight_perturb_sigma = as_f64(key, v)?,
            "perturb_prob" => self.mutation.perturb_prob = as_f64(key, v)?,
            "replace_prob" => self.mutation.replace_prob = as_f64(key, v)?,
            "toggle_prob" => self.mutation.toggle_prob = as_f64(key, v)?,

            "episode_steps" => self.cartpole.episode_steps = as_count(key, v)?,
            "episode_generation" => self.cartpole.episode_generation = as_count(key, v)?,
            "gravity" => self.cartpole.gravity = as_f64(key, v)?,
            "cart_mass" => self.cartpole.cart_mass = as_f64(key, v)?,
            "pole_mass" => self.cartpole.pole_mass = as_f64(key, v)?,
            "pole_half_length" => self.cartpole.pole_half_length = as_f64(key, v)?,
            "force_magnitude" => self.cartpole.force_magnitude = as_f64(key, v)?,
            "tau" => self.cartpole.tau = as_f64(key, v)?,
            "angle_limit_degrees" => self.cartpole.angle_limit_degrees = as_f64(key, v)?,
            "position_limit" => self.cartpole.position_limit = as_f64(key, v)?,
            "action_threshold" => self.cartpole.action_threshold = as_f64(key, v)?,

            "noise_kind" => self.noise.kind = as_str(key, v)?.parse()?,
            "noise_level" => self.noise.level = as_f64(key, v)?,
            "normal_maximum" => self.noise.normal_max = as_f64(key, v)?,
            "normal_minimum" => self.noise.normal_min = as_f64(key, v)?,
            "dilution_coefficient_in_reverse" => self.noise.reverse_dilution = as_f64(key, v)?,
            "peak_in_gaussian" => self.noise.gaussian_peak = as_f64(key, v)?,

            "gate_error" => {
                self.gate_error = match as_str(key, v)?.to_ascii_lowercase().as_str() {
                    "sum_squared" => GateError::SumSquared,
                    "euclidean" => GateError::Euclidean,
                    other => {
                        return Err(Error::Config(format!(
                            "unknown gate_error '{other}' (expected sum_squared or euclidean)"
                        )))
                    }
                }
            }
            "grid_path" => self.grid_path = Some(PathBuf::from(as_str(key, v)?)),
            "grid_tolerance" => self.grid_tolerance = Some(as_f64(key, v)?),

            other => {
                return Err(Error::Config(format!(
                    "unknown key '{other}' (valid keys: {})",
                    CONFIG_KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "benchmark_task",
    "method",
    "iteration",
    "base_seed",
    "output_path",
    "evolution_size",
    "population_size",
    "initial_distance",
    "minimum_distance",
    "rho_threshold",
    "fitness_threshold",
    "max_generations",
    "activation",
    "hidden_nodes",
    "weight_range",
    "bias_range",
    "connect_prob",
    "weight_perturb_sigma",
    "perturb_prob",
    "replace_prob",
    "toggle_prob",
    "episode_steps",
    "episode_generation",
    "gravity",
    "cart_mass",
    "pole_mass",
    "pole_half_length",
    "force_magnitude",
    "tau",
    "angle_limit_degrees",
    "position_limit",
    "action_threshold",
    "noise_kind",
    "noise_level",
    "normal_maximum",
    "normal_minimum",
    "dilution_coefficient_in_reverse",
    "peak_in_gaussian",
    "gate_error",
    "grid_path",
    "grid_tolerance",
];

fn type_error(key: &str, expected: &str, v: &Value) -> Error {
    Error::Config(format!("{key} must be {expected}, got {v}"))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| type_error(key, "a string", v))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(i) => Ok(*i as f64),
        // percentages as written in the hyper-parameter tables, e.g. "50%"
        Value::String(s) if s.trim().ends_with('%') => s
            .trim()
            .trim_end_matches('%')
            .trim()
            .parse::<f64>()
            .map(|p| p / 100.0)
            .map_err(|_| type_error(key, "a number", v)),
        _ => Err(type_error(key, "a number", v)),
    }
}

fn as_u64(key: &str, v: &Value) -> Result<u64> {
    v.as_integer()
        .and_then(|i| u64::try_from(i).ok())
        .ok_or_else(|| type_error(key, "a non-negative integer", v))
}

fn as_count(key: &str, v: &Value) -> Result<usize> {
    as_u64(key, v).map(|n| n as usize)
}

fn as_interval(key: &str, v: &Value) -> Result<Interval> {
    match v.as_array().map(Vec::as_slice) {
        Some([lo, hi]) => Ok(Interval::new(as_f64(key, lo)?, as_f64(key, hi)?)),
        _ => Err(type_error(key, "a [lo, hi] pair", v)),
    }
}

/// The environment selected by a task, dispatching to the concrete type.
#[derive(Debug, Clone)]
pub enum TaskEnv {
    Gate(GateEnv),
    CartPole(CartPoleEnv),
    Rastrigin(RastriginEnv),
    Grid(GridEnv),
}

impl TaskEnv {
    /// Landscape coordinates of an individual and the raw landscape value
    /// there (function value for Rastrigin, height for the grid).
    pub fn landscape_point(&self, individual: &Individual) -> Option<([f64; 2], f64)> {
        match self {
            TaskEnv::Rastrigin(env) => {
                let p = env.point(individual);
                let x = [p[0], p[1]];
                Some((x, crate::environments::rastrigin(&x)))
            }
            TaskEnv::Grid(env) => {
                let p = env.point(individual);
                Some((p, crate::environments::grid_fitness(p, &env.grid)))
            }
            _ => None,
        }
    }
}

impl Environment for TaskEnv {
    fn evaluate(&self, individual: &Individual, seed: u64) -> Result<f64> {
        match self {
            TaskEnv::Gate(e) => e.evaluate(individual, seed),
            TaskEnv::CartPole(e) => e.evaluate(individual, seed),
            TaskEnv::Rastrigin(e) => e.evaluate(individual, seed),
            TaskEnv::Grid(e) => e.evaluate(individual, seed),
        }
    }

    fn is_stochastic(&self) -> bool {
        matches!(self, TaskEnv::CartPole(_))
    }
}
