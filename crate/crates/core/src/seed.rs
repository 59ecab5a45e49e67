//! Seed derivation for independent random substreams.
//!
//! Every consumer of randomness (a run's evolution loop, one fitness
//! evaluation, one noise wrapper) owns a `ChaCha8Rng` seeded from a value
//! derived here. Derivation folds each tag into the state with the
//! SplitMix64 finalizer:
//!
//! ```text
//! state = mix(base)
//! for tag in tags: state = mix(state ^ mix(tag + 0x9E3779B97F4A7C15))
//! ```
//!
//! Because evaluation seeds depend only on `(run seed, generation, index)`,
//! results never depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for the evolution operators of one run.
pub const STREAM_EVOLUTION: u64 = 0x45_56_4F;
/// Stream tag for fitness evaluations.
pub const STREAM_EVALUATION: u64 = 0x45_56_41;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix64(base), |state, &tag| {
        splitmix64(state ^ splitmix64(tag.wrapping_add(0x9E37_79B9_7F4A_7C15)))
    })
}

pub fn substream(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}
