//! Seeded random streams.
//!
//! All randomness goes through ChaCha8 (`rand_chacha::ChaCha8Rng`), whose
//! output is fixed by its published algorithm and does not depend on the
//! platform. Sub-streams for splits, initializations and landmark draws are
//! keyed from a master seed with SplitMix64 so that adding a stream never
//! perturbs another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// One step of the SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent seed for stream `index` of purpose `tag`.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(tag)) ^ index)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Stream tags.
pub(crate) const TAG_SPLIT: u64 = 0x53_504C_4954;
pub(crate) const TAG_MBO_INIT: u64 = 0x4D42_4F49;
pub(crate) const TAG_LANDMARKS: u64 = 0x4C4D_4B53;
pub(crate) const TAG_EIGEN: u64 = 0x4C41_4E43;
pub(crate) const TAG_TRIAL: u64 = 0x54_5249_414C;
