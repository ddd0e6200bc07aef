//! Counter-based seed derivation.
//!
//! Every random stream in the crate is addressed by a path of indices below
//! a master seed: `derive(master, i)` for line `i` of an environment,
//! `derive(master, rep)` for replication `rep`, and so on. The mixing
//! function is SplitMix64's finalizer applied to `master ^ mix(index + φ)`,
//! where φ is the 64-bit golden-ratio constant. It is fixed: changing it
//! changes every output of every experiment.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function (full 64-bit avalanche).
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of child stream `index` under `master`.
#[inline]
pub fn derive(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(GOLDEN)))
}

/// The generator used for every stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Stream tags used below a replication seed.
pub(crate) const TAG_ENV: u64 = 1;
pub(crate) const TAG_PROFILE: u64 = 2;
pub(crate) const TAG_PROFILE_ALT: u64 = 3;
pub(crate) const TAG_ARRIVAL: u64 = 4;
