//! Classic cart-pole balancing with explicit Euler integration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::noise::{NoiseConfig, ObservationNoise};
use crate::error::{Error, Result};
use crate::evolution::Environment;
use crate::genome::{Individual, Network};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartPoleConfig {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Half the pole length.
    pub pole_half_length: f64,
    pub force_magnitude: f64,
    pub tau: f64,
    /// Failure angle from vertical, in degrees.
    pub angle_limit_degrees: f64,
    pub position_limit: f64,
    pub episode_steps: usize,
    /// Episodes averaged per evaluation.
    pub episode_generation: usize,
    /// Push right when the network output exceeds this value.
    pub action_threshold: f64,
}

impl Default for CartPoleConfig {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            pole_half_length: 0.5,
            force_magnitude: 10.0,
            tau: 0.02,
            angle_limit_degrees: 15.0,
            position_limit: 2.4,
            episode_steps: 500,
            episode_generation: 20,
            action_threshold: 0.5,
        }
    }
}

impl CartPoleConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gravity", self.gravity),
            ("cart_mass", self.cart_mass),
            ("pole_mass", self.pole_mass),
            ("pole_half_length", self.pole_half_length),
            ("force_magnitude", self.force_magnitude),
            ("tau", self.tau),
            ("angle_limit_degrees", self.angle_limit_degrees),
            ("position_limit", self.position_limit),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
        if self.episode_steps == 0 || self.episode_generation == 0 {
            return Err(Error::Config(
                "episode_steps and episode_generation must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn angle_limit(&self) -> f64 {
        self.angle_limit_degrees.to_radians()
    }
}

/// `[x, x_dot, theta, theta_dot]`
pub type CartPoleState = [f64; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Left,
    Right,
}

/// One Euler step of the classic cart-pole equations of motion.
pub fn cartpole_step(state: CartPoleState, action: Action, cfg: &CartPoleConfig) -> CartPoleState {
    let [x, x_dot, theta, theta_dot] = state;
    let force = match action {
        Action::Right => cfg.force_magnitude,
        Action::Left => -cfg.force_magnitude,
    };
    let total_mass = cfg.cart_mass + cfg.pole_mass;
    let polemass_length = cfg.pole_mass * cfg.pole_half_length;
    let (sin, cos) = theta.sin_cos();

    let temp = (force + polemass_length * theta_dot * theta_dot * sin) / total_mass;
    let theta_acc = (cfg.gravity * sin - cos * temp)
        / (cfg.pole_half_length * (4.0 / 3.0 - cfg.pole_mass * cos * cos / total_mass));
    let x_acc = temp - polemass_length * theta_acc * cos / total_mass;

    [
        x + cfg.tau * x_dot,
        x_dot + cfg.tau * x_acc,
        theta + cfg.tau * theta_dot,
        theta_dot + cfg.tau * theta_acc,
    ]
}

fn failed(state: &CartPoleState, cfg: &CartPoleConfig) -> bool {
    state[0].abs() > cfg.position_limit || state[2].abs() > cfg.angle_limit()
}

/// Steps survived in one episode.
fn run_episode<R: Rng>(
    net: &Network,
    cfg: &CartPoleConfig,
    noise: &NoiseConfig,
    rng: &mut R,
    noise_rng: &mut R,
    values: &mut [f64],
) -> Result<usize> {
    let mut state: CartPoleState = [0.0; 4];
    for s in &mut state {
        *s = rng.random_range(-0.05..=0.05);
    }
    let mut wrapper = ObservationNoise::new(noise.clone(), 4);
    let out = net.nodes() - 1;
    let mut reward = 0;
    for _ in 0..cfg.episode_steps {
        let obs = wrapper.observe(&state, noise_rng);
        net.activate(&obs, values)?;
        let action = if values[out] > cfg.action_threshold {
            Action::Right
        } else {
            Action::Left
        };
        state = cartpole_step(state, action, cfg);
        reward += 1;
        if failed(&state, cfg) {
            break;
        }
    }
    Ok(reward)
}

/// Mean fraction of `episode_steps` survived over `episode_generation`
/// episodes, each started uniformly in `[-0.05, 0.05]^4`.
pub fn cartpole_fitness<R: Rng + ?Sized>(
    net: &Network,
    cfg: &CartPoleConfig,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<f64> {
    if net.n_in() != 4 || net.n_out() != 1 {
        return Err(Error::Arity {
            expected_in: 4,
            expected_out: 1,
            found_in: net.n_in(),
            found_out: net.n_out(),
        });
    }
    // start states and noise draw from separate streams so a silent noise
    // wrapper leaves the episodes untouched
    let mut start_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut noise_rng = ChaCha8Rng::seed_from_u64(rng.random());
    let mut values = vec![0.0; net.nodes()];
    let mut total = 0usize;
    for _ in 0..cfg.episode_generation {
        total += run_episode(net, cfg, noise, &mut start_rng, &mut noise_rng, &mut values)?;
    }
    Ok(total as f64 / (cfg.episode_generation * cfg.episode_steps) as f64)
}

#[derive(Debug, Clone, Default)]
pub struct CartPoleEnv {
    pub config: CartPoleConfig,
    pub noise: NoiseConfig,
}

impl Environment for CartPoleEnv {
    fn evaluate(&self, individual: &Individual, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        cartpole_fitness(individual.network(), &self.config, &self.noise, &mut rng)
    }

    fn is_stochastic(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_step_from_rest() {
        let cfg = CartPoleConfig::default();
        let right = cartpole_step([0.0; 4], Action::Right, &cfg);
        let left = cartpole_step([0.0; 4], Action::Left, &cfg);
        let expected = [0.0, 0.19512, 0.0, -0.29268];
        for k in 0..4 {
            assert_abs_diff_eq!(right[k], expected[k], epsilon = 1e-5);
            assert_eq!(left[k], -right[k]);
        }
    }

    #[test]
    fn alternating_forces_stay_in_bounds() {
        let cfg = CartPoleConfig::default();
        let mut s = [0.0; 4];
        for (i, a) in [Action::Right, Action::Left, Action::Right, Action::Left]
            .into_iter()
            .enumerate()
        {
            s = cartpole_step(s, a, &cfg);
            assert!(!failed(&s, &cfg), "failed at step {i}");
        }
    }

    #[test]
    fn dynamics_are_deterministic() {
        let cfg = CartPoleConfig::default();
        let s = [0.01, -0.2, 0.03, 0.1];
        let a = cartpole_step(s, Action::Left, &cfg);
        let b = cartpole_step(s, Action::Left, &cfg);
        assert_eq!(a.map(f64::to_bits), b.map(f64::to_bits));
    }
}
