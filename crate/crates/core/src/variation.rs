//! Offspring operators: local mutation around one parent and the two
//! global combiners that place a child between two parents.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genome::{create, FeatureMatrix, GenomeConfig, Individual, Origin};

/// `(sqrt(5) - 1) / 2`, weight of the first parent in the golden blend.
pub const GOLDEN_MAJOR: f64 = 0.618_033_988_749_894_9;
/// `(3 - sqrt(5)) / 2`, weight of the second parent in the golden blend.
pub const GOLDEN_MINOR: f64 = 0.381_966_011_250_105_1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    /// Standard deviation of the Gaussian perturbation.
    pub weight_perturb_sigma: f64,
    pub perturb_prob: f64,
    pub replace_prob: f64,
    /// Probability of adding an absent connection or removing a present one.
    pub toggle_prob: f64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            weight_perturb_sigma: 0.5,
            perturb_prob: 0.8,
            replace_prob: 0.1,
            toggle_prob: 0.05,
        }
    }
}

impl MutationConfig {
    /// Mutation that never changes anything.
    pub fn null() -> Self {
        Self {
            weight_perturb_sigma: 1.0,
            perturb_prob: 0.0,
            replace_prob: 0.0,
            toggle_prob: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("perturb_prob", self.perturb_prob),
            ("replace_prob", self.replace_prob),
            ("toggle_prob", self.toggle_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if !(self.weight_perturb_sigma > 0.0) || !self.weight_perturb_sigma.is_finite() {
            return Err(Error::Config(format!(
                "weight_perturb_sigma = {} must be positive",
                self.weight_perturb_sigma
            )));
        }
        Ok(())
    }
}

/// Which of the mutually exclusive events fires for one cell.
enum CellEvent {
    Replace,
    Perturb,
    Toggle,
    Keep,
}

fn draw_event<R: Rng + ?Sized>(cfg: &MutationConfig, rng: &mut R) -> CellEvent {
    if rng.random_bool(cfg.replace_prob) {
        CellEvent::Replace
    } else if rng.random_bool(cfg.perturb_prob) {
        CellEvent::Perturb
    } else if rng.random_bool(cfg.toggle_prob) {
        CellEvent::Toggle
    } else {
        CellEvent::Keep
    }
}

/// Nearby offspring of `parent`.
///
/// Each admissible cell draws at most one event, tried in the order
/// replace, perturb, toggle. Biases are replaced or perturbed. Present
/// connections are replaced, perturbed or removed; absent connections can
/// only be added by a toggle. Results are clamped to the configured ranges.
pub fn mutate_near<R: Rng + ?Sized>(
    parent: &Individual,
    cfg: &MutationConfig,
    gcfg: &GenomeConfig,
    rng: &mut R,
) -> Result<Individual> {
    let normal = Normal::new(0.0, cfg.weight_perturb_sigma)
        .map_err(|e| Error::Config(format!("weight_perturb_sigma: {e}")))?;
    let mut f = parent.matrix().clone();

    for node in gcfg.n_in..gcfg.m {
        let b = f.bias(node);
        let nb = match draw_event(cfg, rng) {
            CellEvent::Replace => gcfg.bias_range.sample(rng),
            CellEvent::Perturb => gcfg.bias_range.clamp(b + normal.sample(rng)),
            CellEvent::Toggle | CellEvent::Keep => b,
        };
        f.set_bias(node, nb);
    }

    for (from, to) in gcfg.weight_cells() {
        let w = f.weight(from, to);
        let nw = if w == 0.0 {
            if rng.random_bool(cfg.toggle_prob) {
                gcfg.weight_range.sample_nonzero(rng)
            } else {
                0.0
            }
        } else {
            match draw_event(cfg, rng) {
                CellEvent::Replace => gcfg.weight_range.sample_nonzero(rng),
                CellEvent::Perturb => gcfg.weight_range.clamp(w + normal.sample(rng)),
                CellEvent::Toggle => 0.0,
                CellEvent::Keep => w,
            }
        };
        f.set_weight(from, to, nw);
    }

    Ok(create(f, gcfg)?.with_origin(Origin::Near))
}

/// Midpoint child `(f_i + f_j) / 2`.
pub fn binary_combine(
    f_i: &FeatureMatrix,
    f_j: &FeatureMatrix,
    gcfg: &GenomeConfig,
) -> Result<Individual> {
    Ok(create(f_i.blend(0.5, f_j, 0.5)?, gcfg)?.with_origin(Origin::Global))
}

/// Golden-section child `GOLDEN_MAJOR * f_i + GOLDEN_MINOR * f_j`; the
/// first parent gets the larger share.
pub fn golden_combine(
    f_i: &FeatureMatrix,
    f_j: &FeatureMatrix,
    gcfg: &GenomeConfig,
) -> Result<Individual> {
    Ok(create(f_i.blend(GOLDEN_MAJOR, f_j, GOLDEN_MINOR)?, gcfg)?.with_origin(Origin::Global))
}
