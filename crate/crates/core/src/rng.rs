//! Deterministic random streams.
//!
//! Every stochastic draw in the crate comes from a ChaCha stream whose seed is
//! derived from a user seed plus the coordinates of the draw (snapshot,
//! subband, ...). Results therefore never depend on evaluation order or on
//! the number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a path of stream coordinates.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(seed), |acc, &p| mix(acc ^ mix(p)))
}

pub fn stream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}

pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

// Stream tags, so that independent processes sharing a user seed never
// draw from the same stream.
pub(crate) const TAG_NOISE: u64 = 0x4E01_5E00;
pub(crate) const TAG_CLOCK: u64 = 0xC10C_0000;
pub(crate) const TAG_RCS: u64 = 0x0053_C500;
pub(crate) const TAG_HARDWARE: u64 = 0x0048_0057;
pub(crate) const TAG_PILOTS: u64 = 0x0091_1075;
pub(crate) const TAG_SNAPSHOT: u64 = 0x005E_A9B0;
pub(crate) const TAG_SPBP: u64 = 0x0005_9B90;
