//! Task environments that turn a decoded network into a fitness score.

mod cartpole;
mod gates;
mod landscape;
mod noise;

pub use cartpole::{
    cartpole_fitness, cartpole_step, Action, CartPoleConfig, CartPoleEnv, CartPoleState,
};
pub use gates::{gate_fitness, Gate, GateEnv, GateError};
pub use landscape::{
    grid_fitness, load_grid_landscape, parse_grid_landscape, rastrigin, GridEnv, GridLandscape,
    RastriginEnv,
};
pub use noise::{apply_gaussian_noise, apply_reverse_noise, NoiseConfig, NoiseKind, ObservationNoise};
