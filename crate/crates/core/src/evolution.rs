//! The reverse-encoding-tree evolutionary loop.
//!
//! Each generation the population is clustered into `p` groups. The best
//! member of every cluster survives, and every pair of clusters produces
//! two offspring. Which operators produce them depends on how "explored"
//! each cluster looks: the Pearson correlation between a member's distance
//! to its cluster best and its fitness. Strongly negative correlation
//! (fitness falls off with distance) marks a simple, explored neighbourhood,
//! and two such clusters get a global child placed between their centers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::kmeans;
use crate::error::{Error, Result};
use crate::genome::{
    check, create, distance, minimal_feature_matrix, random_feature_matrix, FeatureMatrix,
    GenomeConfig, Individual,
};
use crate::seed::{derive_seed, substream, STREAM_EVALUATION, STREAM_EVOLUTION};
use crate::stats::OnlineCovariance;
use crate::variation::{binary_combine, golden_combine, mutate_near, MutationConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Baseline: elites plus local mutation only.
    Neat,
    /// Baseline with a one-connection starting population.
    FsNeat,
    /// Midpoint global combination.
    BiNeat,
    /// Golden-section global combination.
    GsNeat,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Neat, Method::FsNeat, Method::BiNeat, Method::GsNeat];

    pub fn uses_ret(self) -> bool {
        matches!(self, Method::BiNeat | Method::GsNeat)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Neat => "neat",
            Method::FsNeat => "fs-neat",
            Method::BiNeat => "bi-neat",
            Method::GsNeat => "gs-neat",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method '{s}' (expected one of: neat, fs-neat, bi-neat, gs-neat)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Initial population size and cluster count `p`.
    pub population_size: usize,
    /// Minimum pairwise distance in the initial population.
    pub initial_distance: f64,
    /// Minimum distance between individuals admitted to a generation.
    pub minimum_distance: f64,
    /// Clusters with correlation at or below this value count as explored.
    pub rho_threshold: f64,
    pub fitness_threshold: f64,
    pub max_generations: usize,
    pub method: Method,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: 12,
            initial_distance: 5.0,
            minimum_distance: 0.2,
            rho_threshold: -0.5,
            fitness_threshold: 3.999,
            max_generations: 500,
            method: Method::BiNeat,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::Config(format!(
                "population size p = {} must be at least 2",
                self.population_size
            )));
        }
        if !(self.initial_distance >= self.minimum_distance && self.minimum_distance >= 0.0) {
            return Err(Error::Config(format!(
                "need d_i >= d_m >= 0 (d_i = {}, d_m = {})",
                self.initial_distance, self.minimum_distance
            )));
        }
        if self.max_generations == 0 {
            return Err(Error::Config("max_generations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Cluster count `p` whose `p^2 - p` novel offspring best match a
/// per-generation evaluation budget.
pub fn population_for_budget(evolution_size: usize) -> usize {
    let p = ((1.0 + (1.0 + 4.0 * evolution_size as f64).sqrt()) / 2.0).floor() as usize;
    p.max(2)
}

/// A task that scores decoded individuals. Higher fitness is better.
pub trait Environment: Sync {
    /// Scores one individual. `seed` is unique per (run, generation,
    /// individual) and is the only randomness an evaluation may use.
    fn evaluate(&self, individual: &Individual, seed: u64) -> Result<f64>;

    /// Stochastic environments re-score surviving individuals every
    /// generation instead of trusting a cached fitness.
    fn is_stochastic(&self) -> bool {
        false
    }
}

impl<F> Environment for F
where
    F: Fn(&Individual) -> f64 + Sync,
{
    fn evaluate(&self, individual: &Individual, _seed: u64) -> Result<f64> {
        Ok(self(individual))
    }
}

#[derive(Debug, Clone)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub generation: usize,
}

impl Population {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn fitness(&self, index: usize) -> Result<f64> {
        self.individuals[index].fitness().ok_or(Error::Unevaluated(index))
    }

    /// Index of the fittest evaluated member, lowest index on ties.
    pub fn best_index(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, ind) in self.individuals.iter().enumerate() {
            if let Some(r) = ind.fitness() {
                if best.is_none_or(|(_, b)| r > b) {
                    best = Some((i, r));
                }
            }
        }
        best.map(|(i, _)| i)
    }
}

#[derive(Debug, Clone)]
pub struct ClusterView {
    /// Population indices of the members, ascending.
    pub members: Vec<usize>,
    pub center: FeatureMatrix,
    /// Population index of the fittest member, once computed.
    pub best: Option<usize>,
    /// Distance/fitness correlation; `None` when undefined.
    pub rho: Option<f64>,
}

/// Samples `p` genomes pairwise at least `d_i` apart.
pub fn init_population<R: Rng + ?Sized>(
    ecfg: &EvolutionConfig,
    gcfg: &GenomeConfig,
    rng: &mut R,
) -> Result<Population> {
    ecfg.validate()?;
    gcfg.validate()?;
    let p = ecfg.population_size;
    let d_i = ecfg.initial_distance;
    if d_i > gcfg.diameter() {
        return Err(Error::Config(format!(
            "initial distance d_i = {d_i} exceeds the genome space diameter {:.4}",
            gcfg.diameter()
        )));
    }
    let max_attempts = 1000 * p;
    let mut individuals: Vec<Individual> = Vec::with_capacity(p);
    let mut attempts = 0;
    while individuals.len() < p {
        if attempts == max_attempts {
            return Err(Error::Config(format!(
                "initial distance d_i = {d_i} is infeasible: only {} of {p} individuals placed after {max_attempts} attempts",
                individuals.len()
            )));
        }
        attempts += 1;
        let f = match ecfg.method {
            Method::FsNeat => minimal_feature_matrix(gcfg, rng),
            _ => random_feature_matrix(gcfg, rng),
        };
        let candidate = create(f, gcfg)?;
        if check(d_i, &candidate, &individuals) {
            individuals.push(candidate);
        }
    }
    Ok(Population {
        individuals,
        generation: 0,
    })
}

/// K-means++ partition of the population into `p` clusters (fewer when the
/// population is smaller). Best and correlation are left unset.
pub fn cluster_population<R: Rng + ?Sized>(
    population: &Population,
    p: usize,
    rng: &mut R,
) -> Vec<ClusterView> {
    let k = p.min(population.len());
    if k == 0 {
        return Vec::new();
    }
    let points: Vec<&[f64]> = population
        .individuals
        .iter()
        .map(|ind| ind.matrix().as_slice())
        .collect();
    let m = population.individuals[0].matrix().nodes();
    let clustering = kmeans(&points, k, rng);
    clustering
        .centers
        .into_iter()
        .enumerate()
        .map(|(c, center)| ClusterView {
            members: clustering
                .assignment
                .iter()
                .enumerate()
                .filter(|&(_, &a)| a == c)
                .map(|(i, _)| i)
                .collect(),
            center: FeatureMatrix::from_flat(m, center).expect("center has matrix shape"),
            best: None,
            rho: None,
        })
        .collect()
}

/// Fittest member of the cluster; ties go to the lowest population index.
pub fn best_of_cluster(cluster: &ClusterView, population: &Population) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &i in &cluster.members {
        let r = population.fitness(i)?;
        match best {
            Some((bi, br)) if br > r || (br == r && bi < i) => {}
            _ => best = Some((i, r)),
        }
    }
    best.map(|(i, _)| i)
        .ok_or_else(|| Error::Config("cluster has no members".into()))
}

/// Pearson correlation between each member's distance to the cluster best
/// and its fitness. `None` for fewer than three members or zero variance.
pub fn cluster_correlation(cluster: &ClusterView, population: &Population) -> Result<Option<f64>> {
    let best = match cluster.best {
        Some(b) => b,
        None => best_of_cluster(cluster, population)?,
    };
    let anchor = population.individuals[best].matrix();
    let mut acc = OnlineCovariance::default();
    for &i in &cluster.members {
        let d = distance(anchor, population.individuals[i].matrix())?;
        acc.push(d, population.fitness(i)?);
    }
    Ok(acc.correlation(3))
}

/// Fills in best member and correlation of every cluster, then orders the
/// clusters by descending best fitness (ties by best index) so that the
/// global best is always considered first.
pub fn analyse_clusters(clusters: &mut [ClusterView], population: &Population) -> Result<()> {
    for c in clusters.iter_mut() {
        c.best = Some(best_of_cluster(c, population)?);
        c.rho = cluster_correlation(c, population)?;
    }
    let key = |c: &ClusterView| {
        let b = c.best.expect("analysed");
        (population.individuals[b].fitness().expect("evaluated"), b)
    };
    clusters.sort_by(|x, y| {
        let (fx, bx) = key(x);
        let (fy, by) = key(y);
        fy.total_cmp(&fx).then(bx.cmp(&by))
    });
    Ok(())
}

/// Which branch of the pair rule produced a pair of offspring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRule {
    /// Both clusters explored: mutate the better best, combine the centers.
    Global,
    /// Only the weaker cluster explored: two mutations of the better best.
    DoubleNear,
    /// Weaker cluster unexplored: mutate each cluster's best.
    Near,
    /// Baseline methods always mutate each cluster's best.
    Baseline,
}

/// Two offspring for a cluster pair. The pair is relabelled so that `a`
/// holds the fitter best (input order is kept on ties); an undefined
/// correlation counts as explored.
#[allow(clippy::too_many_arguments)]
pub fn ret_pair<R: Rng + ?Sized>(
    a: &ClusterView,
    b: &ClusterView,
    population: &Population,
    ecfg: &EvolutionConfig,
    mcfg: &MutationConfig,
    gcfg: &GenomeConfig,
    rng: &mut R,
) -> Result<(Individual, Individual)> {
    ret_pair_traced(a, b, population, ecfg, mcfg, gcfg, rng).map(|(pair, _)| pair)
}

#[allow(clippy::too_many_arguments)]
pub fn ret_pair_traced<R: Rng + ?Sized>(
    a: &ClusterView,
    b: &ClusterView,
    population: &Population,
    ecfg: &EvolutionConfig,
    mcfg: &MutationConfig,
    gcfg: &GenomeConfig,
    rng: &mut R,
) -> Result<((Individual, Individual), PairRule)> {
    let best_a = a.best.map_or_else(|| best_of_cluster(a, population), Ok)?;
    let best_b = b.best.map_or_else(|| best_of_cluster(b, population), Ok)?;
    let (a, b, best_a, best_b) =
        if population.fitness(best_b)? > population.fitness(best_a)? {
            (b, a, best_b, best_a)
        } else {
            (a, b, best_a, best_b)
        };
    let elite_a = &population.individuals[best_a];
    let elite_b = &population.individuals[best_b];

    if !ecfg.method.uses_ret() {
        let first = mutate_near(elite_a, mcfg, gcfg, rng)?;
        let second = mutate_near(elite_b, mcfg, gcfg, rng)?;
        return Ok(((first, second), PairRule::Baseline));
    }

    let explored = |rho: Option<f64>| rho.is_none_or(|r| r <= ecfg.rho_threshold);
    match (explored(a.rho), explored(b.rho)) {
        (true, true) => {
            let first = mutate_near(elite_a, mcfg, gcfg, rng)?;
            let second = match ecfg.method {
                Method::GsNeat => golden_combine(&a.center, &b.center, gcfg)?,
                _ => binary_combine(&a.center, &b.center, gcfg)?,
            };
            Ok(((first, second), PairRule::Global))
        }
        (false, true) => {
            let first = mutate_near(elite_a, mcfg, gcfg, rng)?;
            let second = mutate_near(elite_a, mcfg, gcfg, rng)?;
            Ok(((first, second), PairRule::DoubleNear))
        }
        (_, false) => {
            let first = mutate_near(elite_a, mcfg, gcfg, rng)?;
            let second = mutate_near(elite_b, mcfg, gcfg, rng)?;
            Ok(((first, second), PairRule::Near))
        }
    }
}

/// Per-generation bookkeeping of the turnover step.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenerationTrace {
    pub clusters: usize,
    /// Clusters whose correlation was undefined (treated as explored).
    pub undefined_rho: usize,
    pub saved: usize,
    pub novel: usize,
    /// Pair counts for the global, double-near, near and baseline rules.
    pub rules: [usize; 4],
}

/// Next generation: surviving cluster bests plus admitted offspring.
pub fn evolve_generation<R: Rng + ?Sized>(
    population: &Population,
    ecfg: &EvolutionConfig,
    mcfg: &MutationConfig,
    gcfg: &GenomeConfig,
    rng: &mut R,
) -> Result<Population> {
    evolve_generation_traced(population, ecfg, mcfg, gcfg, rng).map(|(p, _)| p)
}

pub fn evolve_generation_traced<R: Rng + ?Sized>(
    population: &Population,
    ecfg: &EvolutionConfig,
    mcfg: &MutationConfig,
    gcfg: &GenomeConfig,
    rng: &mut R,
) -> Result<(Population, GenerationTrace)> {
    for i in 0..population.len() {
        population.fitness(i)?;
    }
    let mut clusters = cluster_population(population, ecfg.population_size, rng);
    analyse_clusters(&mut clusters, population)?;

    let mut trace = GenerationTrace {
        clusters: clusters.len(),
        undefined_rho: clusters.iter().filter(|c| c.rho.is_none()).count(),
        ..GenerationTrace::default()
    };

    let d_m = ecfg.minimum_distance;
    let mut next: Vec<Individual> = Vec::new();
    for c in &clusters {
        let elite = &population.individuals[c.best.expect("analysed")];
        if check(d_m, elite, &next) {
            next.push(elite.clone());
        }
    }
    trace.saved = next.len();

    for i in 0..clusters.len() {
        for j in i + 1..clusters.len() {
            let ((first, second), rule) = ret_pair_traced(
                &clusters[i],
                &clusters[j],
                population,
                ecfg,
                mcfg,
                gcfg,
                rng,
            )?;
            trace.rules[rule as usize] += 1;
            for child in [first, second] {
                if check(d_m, &child, &next) {
                    next.push(child);
                }
            }
        }
    }
    trace.novel = next.len() - trace.saved;

    Ok((
        Population {
            individuals: next,
            generation: population.generation + 1,
        },
        trace,
    ))
}

/// Scores every unevaluated member (every member, for stochastic
/// environments). Seeds depend only on run seed, generation and index.
pub fn evaluate_population<E: Environment + ?Sized>(
    population: &mut Population,
    env: &E,
    run_seed: u64,
) -> Result<()> {
    let generation = population.generation as u64;
    let stochastic = env.is_stochastic();
    for (i, ind) in population.individuals.iter_mut().enumerate() {
        if stochastic || !ind.is_evaluated() {
            let seed = derive_seed(run_seed, &[STREAM_EVALUATION, generation, i as u64]);
            let r = env.evaluate(ind, seed)?;
            ind.set_fitness(r);
        }
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub solved: bool,
    /// Generation at which the threshold was met, or `max_generations`.
    pub end_generation: usize,
    /// Fittest individual seen (the solving one when solved).
    pub best: Individual,
    pub best_fitness: f64,
}

/// What an observer sees after each generation is evaluated.
pub struct GenerationView<'a> {
    pub population: &'a Population,
    /// Trace of the turnover that produced this population, if any.
    pub trace: Option<&'a GenerationTrace>,
}

/// Runs the full loop: evaluate, stop on threshold, evolve.
pub fn run_evolution<E: Environment + ?Sized>(
    env: &E,
    ecfg: &EvolutionConfig,
    mcfg: &MutationConfig,
    gcfg: &GenomeConfig,
    seed: u64,
) -> Result<RunOutcome> {
    run_evolution_observed(env, ecfg, mcfg, gcfg, seed, |_| {})
}

pub fn run_evolution_observed<E, F>(
    env: &E,
    ecfg: &EvolutionConfig,
    mcfg: &MutationConfig,
    gcfg: &GenomeConfig,
    seed: u64,
    mut observer: F,
) -> Result<RunOutcome>
where
    E: Environment + ?Sized,
    F: FnMut(&GenerationView<'_>),
{
    ecfg.validate()?;
    mcfg.validate()?;
    gcfg.validate()?;
    let mut rng: ChaCha8Rng = substream(seed, &[STREAM_EVOLUTION]);
    let mut population = init_population(ecfg, gcfg, &mut rng)?;
    let mut trace: Option<GenerationTrace> = None;
    let mut best: Option<Individual> = None;

    for generation in 0..ecfg.max_generations {
        population.generation = generation;
        evaluate_population(&mut population, env, seed)?;
        observer(&GenerationView {
            population: &population,
            trace: trace.as_ref(),
        });

        let top = population.best_index().expect("population is evaluated");
        let top_ind = &population.individuals[top];
        let top_r = top_ind.fitness().expect("evaluated");
        if best
            .as_ref()
            .is_none_or(|b| top_r > b.fitness().expect("evaluated"))
        {
            best = Some(top_ind.clone());
        }
        if top_r >= ecfg.fitness_threshold {
            return Ok(RunOutcome {
                solved: true,
                end_generation: generation,
                best: top_ind.clone(),
                best_fitness: top_r,
            });
        }
        if generation + 1 == ecfg.max_generations {
            break;
        }
        let (next, t) = evolve_generation_traced(&population, ecfg, mcfg, gcfg, &mut rng)?;
        population = next;
        trace = Some(t);
    }

    let best = best.expect("at least one generation ran");
    let best_fitness = best.fitness().expect("evaluated");
    Ok(RunOutcome {
        solved: false,
        end_generation: ecfg.max_generations,
        best,
        best_fitness,
    })
}
