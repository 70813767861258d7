//! Derivation of per-purpose seeds from one run seed.
//!
//! Every random stream in a run is seeded with `derive(run_seed, purpose)`,
//! a SplitMix64 mix of the two values, so that changing how one stream is
//! consumed never shifts another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random streams used by the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    /// Train/test split permutation.
    Split = 1,
    /// Weight initialisation.
    Init = 2,
    /// Mini-batch order.
    Batches = 3,
    /// Subset selection (analytic subsets, data fractions).
    Subset = 4,
    /// k-fold assignment.
    Folds = 5,
    /// Measurement noise injection.
    Noise = 6,
}

/// Seed for `purpose` derived from `seed`.
pub fn derive(seed: u64, purpose: Purpose) -> u64 {
    splitmix64(splitmix64(seed) ^ (purpose as u64).wrapping_mul(0xA076_1D64_78BD_642F))
}

/// Deterministic generator for `purpose`.
pub fn rng(seed: u64, purpose: Purpose) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, purpose))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
