//! Observation noise wrappers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::Welford;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    None,
    Gaussian,
    Reverse,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::None => "none",
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::Reverse => "reverse",
        }
    }
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(NoiseKind::None),
            "gaussian" => Ok(NoiseKind::Gaussian),
            "reverse" => Ok(NoiseKind::Reverse),
            other => Err(Error::Config(format!(
                "unknown noise kind '{other}' (expected none, gaussian or reverse)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    /// Noise level in `[0, 1]`.
    pub level: f64,
    pub gaussian_peak: f64,
    pub reverse_dilution: f64,
    pub normal_min: f64,
    pub normal_max: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            kind: NoiseKind::None,
            level: 0.0,
            gaussian_peak: 0.20,
            reverse_dilution: 0.5,
            normal_min: 0.05,
            normal_max: 0.10,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.level) {
            return Err(Error::Config(format!("noise level {} outside [0, 1]", self.level)));
        }
        if !(0.0..=1.0).contains(&self.reverse_dilution) {
            return Err(Error::Config(format!(
                "reverse dilution {} outside [0, 1]",
                self.reverse_dilution
            )));
        }
        Ok(())
    }

    /// Default sweep: noise-free, the two normal bounds, and the peak.
    pub fn sweep_levels(&self) -> Vec<f64> {
        vec![0.0, self.normal_min, self.normal_max, self.gaussian_peak]
    }

    fn is_identity(&self) -> bool {
        self.kind == NoiseKind::None || self.level == 0.0
    }
}

/// Adds zero-mean Gaussian noise with per-dimension scale `level * std`,
/// where `std` is the running standard deviation of the recorded clean
/// observations (1.0 until two have been recorded).
pub fn apply_gaussian_noise<R: Rng + ?Sized>(
    obs: &[f64],
    noise: &NoiseConfig,
    stats: &[Welford],
    rng: &mut R,
) -> Vec<f64> {
    if noise.level == 0.0 {
        return obs.to_vec();
    }
    obs.iter()
        .enumerate()
        .map(|(d, &x)| {
            let sd = stats.get(d).and_then(Welford::sample_std).unwrap_or(1.0);
            let z: f64 = StandardNormal.sample(rng);
            x + noise.level * sd * z
        })
        .collect()
}

/// Negates the whole observation with probability `level * dilution`.
pub fn apply_reverse_noise<R: Rng + ?Sized>(obs: &[f64], noise: &NoiseConfig, rng: &mut R) -> Vec<f64> {
    let p = (noise.level * noise.reverse_dilution).clamp(0.0, 1.0);
    if p > 0.0 && rng.random_bool(p) {
        obs.iter().map(|x| -x).collect()
    } else {
        obs.to_vec()
    }
}

/// Stateful wrapper used inside one evaluation: records clean
/// observations and hands back the perturbed ones.
#[derive(Debug, Clone)]
pub struct ObservationNoise {
    config: NoiseConfig,
    stats: Vec<Welford>,
}

impl ObservationNoise {
    pub fn new(config: NoiseConfig, dim: usize) -> Self {
        Self {
            config,
            stats: vec![Welford::new(); dim],
        }
    }

    pub fn observe<R: Rng + ?Sized>(&mut self, clean: &[f64], rng: &mut R) -> Vec<f64> {
        if self.config.is_identity() {
            return clean.to_vec();
        }
        match self.config.kind {
            NoiseKind::None => clean.to_vec(),
            NoiseKind::Gaussian => {
                for (s, &x) in self.stats.iter_mut().zip(clean) {
                    s.push(x);
                }
                apply_gaussian_noise(clean, &self.config, &self.stats, rng)
            }
            NoiseKind::Reverse => apply_reverse_noise(clean, &self.config, rng),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(kind: NoiseKind, level: f64) -> NoiseConfig {
        NoiseConfig {
            kind,
            level,
            ..NoiseConfig::default()
        }
    }

    #[test]
    fn zero_level_is_bitwise_identity() {
        let obs = [0.1, -0.0, 1e-300, -7.25];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = apply_gaussian_noise(&obs, &cfg(NoiseKind::Gaussian, 0.0), &[], &mut rng);
        let r = apply_reverse_noise(&obs, &cfg(NoiseKind::Reverse, 0.0), &mut rng);
        for out in [g, r] {
            for (a, b) in out.iter().zip(&obs) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn gaussian_scale_and_mean() {
        let noise = cfg(NoiseKind::Gaussian, 0.20);
        let mut stats = Welford::new();
        for x in [-1.0, 0.0, 1.0] {
            stats.push(x);
        }
        assert_eq!(stats.sample_std(), Some(1.0));
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut added = Welford::new();
        for _ in 0..10_000 {
            let out = apply_gaussian_noise(&[3.0], &noise, std::slice::from_ref(&stats), &mut rng);
            added.push(out[0] - 3.0);
        }
        let sd = added.sample_std().unwrap();
        assert!((sd - 0.20).abs() <= 0.05 * 0.20, "sd {sd}");
        assert!(added.mean().abs() <= 0.01, "mean {}", added.mean());
    }

    #[test]
    fn reverse_flip_fraction() {
        let noise = cfg(NoiseKind::Reverse, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let obs = [0.5, -2.0];
        let mut flips = 0;
        for _ in 0..10_000 {
            let out = apply_reverse_noise(&obs, &noise, &mut rng);
            if out == obs {
                continue;
            }
            assert_eq!(out, vec![-0.5, 2.0]);
            flips += 1;
        }
        let frac = flips as f64 / 10_000.0;
        assert!((frac - 0.5).abs() <= 0.02, "{frac}");
    }

    #[test]
    fn default_sweep_levels() {
        assert_eq!(NoiseConfig::default().sweep_levels(), vec![0.0, 0.05, 0.10, 0.20]);
    }
}
