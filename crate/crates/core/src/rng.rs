//! Seeded random streams.
//!
//! Every stochastic draw goes through [`ChaCha8Rng`]. Independent jobs
//! (chains, replicates, folds) get their own stream selected from a master
//! seed and a small tuple of job coordinates, so results do not depend on
//! scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a seed with job coordinates into a derived 64-bit seed.
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(splitmix(seed), |acc, &c| splitmix(acc ^ splitmix(c)))
}

/// Generator for the job identified by `coords` under `seed`.
pub fn stream(seed: u64, coords: &[u64]) -> Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, coords))
}
