//! Fixed-scale feature-matrix genomes.
//!
//! A genome with at most `m` nodes is an `m x (m + 1)` matrix. Column 0
//! holds the per-node bias; column `j + 1` of row `i` holds the weight of
//! the connection `i -> j`, with `0.0` meaning "no connection". Only cells
//! with `i < j` may be nonzero, so every matrix decodes to a feedforward
//! network whose evaluation order is the node index order.
//!
//! Node layout: `0..n_in` are inputs, `m - n_out..m` are outputs and
//! everything in between is hidden.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Relu => z.max(0.0),
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.lo + rng.random::<f64>() * self.width()
    }

    /// Uniform draw that is never exactly zero, for cells where zero would
    /// mean "absent".
    pub fn sample_nonzero<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.sample(rng);
            if x != 0.0 {
                return x;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenomeConfig {
    pub n_in: usize,
    pub n_out: usize,
    /// Maximum total node count.
    pub m: usize,
    pub activation: Activation,
    pub weight_range: Interval,
    pub bias_range: Interval,
    /// Probability that an admissible connection is present in a fresh
    /// random genome.
    pub connect_prob: f64,
    /// Restrict genomes to bias cells only. Used when the genome is a plain
    /// position vector rather than a network.
    pub bias_only: bool,
}

impl Default for GenomeConfig {
    fn default() -> Self {
        Self::for_arity(2, 1, 7, Activation::Sigmoid)
    }
}

impl GenomeConfig {
    pub fn for_arity(n_in: usize, n_out: usize, hidden: usize, activation: Activation) -> Self {
        Self {
            n_in,
            n_out,
            m: n_in + n_out + hidden,
            activation,
            weight_range: Interval::new(-5.0, 5.0),
            bias_range: Interval::new(-5.0, 5.0),
            connect_prob: 0.75,
            bias_only: false,
        }
    }

    /// A bias-only genome of `dim` output nodes: a point in `bounds^dim`.
    pub fn position(dim: usize, bounds: Interval) -> Self {
        Self {
            n_in: 0,
            n_out: dim,
            m: dim,
            activation: Activation::Sigmoid,
            weight_range: bounds,
            bias_range: bounds,
            connect_prob: 0.0,
            bias_only: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_out == 0 {
            return Err(Error::Config("n_out must be at least 1".into()));
        }
        if self.m < self.n_in + self.n_out {
            return Err(Error::Config(format!(
                "m = {} is smaller than n_in + n_out = {}",
                self.m,
                self.n_in + self.n_out
            )));
        }
        for (name, r) in [("weight_range", self.weight_range), ("bias_range", self.bias_range)] {
            if !(r.lo < r.hi) || !r.lo.is_finite() || !r.hi.is_finite() {
                return Err(Error::Config(format!("{name} [{}, {}] is empty", r.lo, r.hi)));
            }
        }
        if !(0.0..=1.0).contains(&self.connect_prob) {
            return Err(Error::Config(format!(
                "connect_prob {} outside [0, 1]",
                self.connect_prob
            )));
        }
        Ok(())
    }

    pub fn hidden(&self) -> usize {
        self.m - self.n_in - self.n_out
    }

    pub fn is_input(&self, node: usize) -> bool {
        node < self.n_in
    }

    /// Whether the bias of `node` is part of the search space.
    pub fn bias_admissible(&self, node: usize) -> bool {
        node >= self.n_in && node < self.m
    }

    /// Whether the connection `from -> to` is part of the search space.
    /// Connections must point forward and must not target an input node.
    pub fn weight_admissible(&self, from: usize, to: usize) -> bool {
        !self.bias_only && from < to && to < self.m && to >= self.n_in
    }

    /// Admissible weight cells as `(from, to)` pairs, row-major.
    pub fn weight_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.m).flat_map(move |from| {
            (from + 1..self.m)
                .filter(move |&to| self.weight_admissible(from, to))
                .map(move |to| (from, to))
        })
    }

    /// Largest possible distance between two matrices of this config.
    pub fn diameter(&self) -> f64 {
        let biases = (self.n_in..self.m).count() as f64 * self.bias_range.width().powi(2);
        let weights = self.weight_cells().count() as f64 * self.weight_range.width().powi(2);
        (biases + weights).sqrt()
    }
}

/// `m x (m + 1)` matrix of biases (column 0) and connection weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    m: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(m: usize) -> Self {
        Self {
            m,
            data: vec![0.0; m * (m + 1)],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let mut data = Vec::with_capacity(m * (m + 1));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m + 1 {
                return Err(Error::DimensionMismatch {
                    expected: format!("{} columns", m + 1),
                    found: format!("{} columns in row {i}", row.len()),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { m, data })
    }

    pub fn from_flat(m: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * (m + 1) {
            return Err(Error::DimensionMismatch {
                expected: format!("{} entries", m * (m + 1)),
                found: format!("{} entries", data.len()),
            });
        }
        Ok(Self { m, data })
    }

    pub fn nodes(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.m, self.m + 1)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.m + 1).map(<[f64]>::to_vec).collect()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * (self.m + 1) + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        let cols = self.m + 1;
        self.data[row * cols + col] = value;
    }

    #[inline]
    pub fn bias(&self, node: usize) -> f64 {
        self.get(node, 0)
    }

    pub fn set_bias(&mut self, node: usize, value: f64) {
        self.set(node, 0, value);
    }

    /// Weight of `from -> to`.
    #[inline]
    pub fn weight(&self, from: usize, to: usize) -> f64 {
        self.get(from, to + 1)
    }

    pub fn set_weight(&mut self, from: usize, to: usize, value: f64) {
        self.set(from, to + 1, value);
    }

    pub(crate) fn ensure_same_shape(&self, other: &FeatureMatrix) -> Result<()> {
        if self.m != other.m {
            return Err(Error::DimensionMismatch {
                expected: format!("{0}x{1}", self.m, self.m + 1),
                found: format!("{0}x{1}", other.m, other.m + 1),
            });
        }
        Ok(())
    }

    /// Elementwise `a * self + b * other`.
    pub(crate) fn blend(&self, a: f64, other: &FeatureMatrix, b: f64) -> Result<FeatureMatrix> {
        self.ensure_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(&x, &y)| a * x + b * y)
            .collect();
        Ok(FeatureMatrix { m: self.m, data })
    }
}

/// Squared Euclidean distance of two equally long slices.
#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Frobenius (elementwise Euclidean) distance between two feature matrices.
pub fn distance(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<f64> {
    a.ensure_same_shape(b)?;
    Ok(squared_distance(&a.data, &b.data).sqrt())
}

/// Decoded feedforward network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n_in: usize,
    n_out: usize,
    activation: Activation,
    bias: Vec<f64>,
    /// Incoming `(source, weight)` pairs per node; sources always precede
    /// their target.
    incoming: Vec<Vec<(usize, f64)>>,
}

impl Network {
    pub fn n_in(&self) -> usize {
        self.n_in
    }

    pub fn n_out(&self) -> usize {
        self.n_out
    }

    pub fn nodes(&self) -> usize {
        self.bias.len()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn forward(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let mut values = vec![0.0; self.nodes()];
        self.activate(inputs, &mut values)?;
        Ok(values[self.nodes() - self.n_out..].to_vec())
    }

    /// Runs one sweep writing every node value into `values`, which must
    /// hold `nodes()` entries. Outputs are the last `n_out` slots.
    pub fn activate(&self, inputs: &[f64], values: &mut [f64]) -> Result<()> {
        if inputs.len() != self.n_in {
            return Err(Error::DimensionMismatch {
                expected: format!("{} inputs", self.n_in),
                found: format!("{} inputs", inputs.len()),
            });
        }
        if let Some(i) = inputs.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput(i));
        }
        values[..self.n_in].copy_from_slice(inputs);
        for node in self.n_in..self.nodes() {
            let z = self.incoming[node]
                .iter()
                .fold(self.bias[node], |acc, &(src, w)| acc + w * values[src]);
            values[node] = self.activation.apply(z);
        }
        Ok(())
    }

    /// Nodes touched by at least one connection.
    pub fn wired_node_count(&self) -> usize {
        let mut touched = vec![false; self.nodes()];
        for (to, inc) in self.incoming.iter().enumerate() {
            for &(from, _) in inc {
                touched[from] = true;
                touched[to] = true;
            }
        }
        touched.into_iter().filter(|&t| t).count()
    }
}

/// Operator that produced an individual.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Origin {
    /// Decoded directly (initial population or user supplied).
    #[default]
    Created,
    /// Local mutation of one parent.
    Near,
    /// Blend of two cluster centers.
    Global,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Created => "created",
            Origin::Near => "near",
            Origin::Global => "global",
        }
    }
}

/// A genome together with its decoded network and (once evaluated) fitness.
#[derive(Debug, Clone)]
pub struct Individual {
    matrix: FeatureMatrix,
    fitness: Option<f64>,
    network: Network,
    origin: Origin,
}

impl Individual {
    pub fn matrix(&self) -> &FeatureMatrix {
        &self.matrix
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn fitness(&self) -> Option<f64> {
        self.fitness
    }

    pub fn is_evaluated(&self) -> bool {
        self.fitness.is_some()
    }

    pub fn set_fitness(&mut self, fitness: f64) {
        self.fitness = Some(fitness);
    }

    pub fn with_fitness(mut self, fitness: f64) -> Self {
        self.fitness = Some(fitness);
        self
    }

    pub fn into_matrix(self) -> FeatureMatrix {
        self.matrix
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub(crate) fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }
}

/// Decodes `matrix` into an unevaluated individual.
pub fn create(matrix: FeatureMatrix, cfg: &GenomeConfig) -> Result<Individual> {
    if matrix.m != cfg.m {
        return Err(Error::DimensionMismatch {
            expected: format!("{0}x{1}", cfg.m, cfg.m + 1),
            found: format!("{0}x{1}", matrix.m, matrix.m + 1),
        });
    }
    let m = cfg.m;
    let mut incoming = vec![Vec::new(); m];
    for from in 0..m {
        for to in 0..m {
            let w = matrix.weight(from, to);
            if w == 0.0 {
                continue;
            }
            if !w.is_finite() {
                return Err(Error::InvalidGenome(format!(
                    "non-finite weight {w} on {from} -> {to}"
                )));
            }
            if to <= from {
                return Err(Error::InvalidGenome(format!(
                    "backward connection {from} -> {to} (weight {w})"
                )));
            }
            if cfg.weight_admissible(from, to) {
                incoming[to].push((from, w));
            }
        }
    }
    let bias = (0..m)
        .map(|node| {
            if cfg.bias_admissible(node) {
                matrix.bias(node)
            } else {
                0.0
            }
        })
        .collect::<Vec<_>>();
    if let Some(node) = bias.iter().position(|b| !b.is_finite()) {
        return Err(Error::InvalidGenome(format!("non-finite bias on node {node}")));
    }
    let network = Network {
        n_in: cfg.n_in,
        n_out: cfg.n_out,
        activation: cfg.activation,
        bias,
        incoming,
    };
    Ok(Individual {
        matrix,
        fitness: None,
        network,
        origin: Origin::Created,
    })
}

/// True when `individual` is at least `d` away from every member of `others`.
pub fn check(d: f64, individual: &Individual, others: &[Individual]) -> bool {
    let a = individual.matrix.as_slice();
    others.iter().all(|other| {
        let b = other.matrix.as_slice();
        a.len() == b.len() && squared_distance(a, b).sqrt() >= d
    })
}

/// Draws a fresh genome: each admissible connection is present with
/// probability `connect_prob` (uniform weight), every admissible bias is
/// uniform in `bias_range`.
pub fn random_feature_matrix<R: Rng + ?Sized>(cfg: &GenomeConfig, rng: &mut R) -> FeatureMatrix {
    let mut f = FeatureMatrix::zeros(cfg.m);
    for node in cfg.n_in..cfg.m {
        f.set_bias(node, cfg.bias_range.sample(rng));
    }
    for (from, to) in cfg.weight_cells() {
        if rng.random_bool(cfg.connect_prob) {
            f.set_weight(from, to, cfg.weight_range.sample_nonzero(rng));
        }
    }
    f
}

/// Minimal-start genome: random biases and exactly one input -> output
/// connection.
pub fn minimal_feature_matrix<R: Rng + ?Sized>(cfg: &GenomeConfig, rng: &mut R) -> FeatureMatrix {
    let mut f = FeatureMatrix::zeros(cfg.m);
    for node in cfg.n_in..cfg.m {
        f.set_bias(node, cfg.bias_range.sample(rng));
    }
    if cfg.n_in > 0 && !cfg.bias_only {
        let from = rng.random_range(0..cfg.n_in);
        let to = cfg.m - cfg.n_out + rng.random_range(0..cfg.n_out);
        f.set_weight(from, to, cfg.weight_range.sample_nonzero(rng));
    }
    f
}
