//! Neuroevolution with a reverse encoding tree.
//!
//! Genomes are fixed-size feature matrices ([`genome`]). Every generation
//! the population is clustered, cluster bests survive, and each pair of
//! clusters produces two offspring either by local mutation or by placing a
//! child between the two cluster centers ([`variation`], [`evolution`]).
//! Benchmark tasks live in [`environments`]; [`harness`] runs repeated
//! experiments and writes CSV results.

pub mod cluster;
pub mod environments;
pub mod error;
pub mod evolution;
pub mod genome;
pub mod harness;
pub mod seed;
pub mod stats;
pub mod variation;

pub use error::{Error, Result};
pub use evolution::{
    best_of_cluster, cluster_correlation, cluster_population, evolve_generation, init_population,
    evolve_generation_traced, population_for_budget, ret_pair, run_evolution,
    run_evolution_observed, ClusterView, Environment, EvolutionConfig, GenerationTrace,
    GenerationView, Method, PairRule, Population, RunOutcome,
};
pub use genome::{
    check, create, distance, random_feature_matrix, Activation, FeatureMatrix, GenomeConfig,
    Individual, Interval, Network, Origin,
};
pub use variation::{binary_combine, golden_combine, mutate_near, MutationConfig};
