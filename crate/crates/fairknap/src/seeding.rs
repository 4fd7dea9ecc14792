//! Deterministic seed derivation.
//!
//! Every randomized routine takes a single `u64` seed and derives all
//! internal randomness from it, so identical inputs give identical outputs
//! and sub-tasks (gradient samples, rounding trials, per-parameter solves)
//! can be re-seeded independently without correlation.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One round of the splitmix64 output permutation; a cheap, well-mixed
/// 64-bit finalizer.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from `(master, index)`.
///
/// Distinct indices under the same master give statistically independent
/// streams; the same pair always gives the same child.
pub fn derive(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xA24B_AED4_963E_E407))
}

/// A fresh deterministic generator for the given seed.
pub fn new_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A single uniform draw in `[0, 1)` addressed by `(seed, index)`.
///
/// Counter-based: draw `i` of a run depends only on the seed and `i`, not
/// on how many draws preceded it, which keeps rounding traces replayable.
pub fn unit_uniform(seed: u64, index: u64) -> f64 {
    let bits = derive(seed, index);
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
