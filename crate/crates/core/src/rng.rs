//! Seed derivation.
//!
//! Every random stream is a `ChaCha8Rng` keyed by the run seed plus a path of
//! tags (component, sweep, firm, ...). Streams never depend on scheduling, so
//! serial and parallel execution draw identical numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tag for the changepoint sampler's per-firm indicator draws.
pub const TAG_GAMMA: u64 = 0x6761_6d6d;
/// Tag for the changepoint sampler's mixing-weight draws.
pub const TAG_OMEGA: u64 = 0x6f6d_6567;
/// Tag for the return-panel simulator.
pub const TAG_SIM_PANEL: u64 = 0x7061_6e6c;
/// Tag for the firm-cohort simulator.
pub const TAG_SIM_FIRMS: u64 = 0x6669_726d;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with a path of tags into a new 64-bit seed.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(seed), |acc, &tag| splitmix64(acc ^ splitmix64(tag)))
}

pub fn stream(seed: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, path))
}
