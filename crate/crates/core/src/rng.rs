//! Seed derivation for reproducible, independent random streams.
//!
//! Every run draws from a [`ChaCha8Rng`]. The key is derived from the master
//! seed and a cell identifier, and the run index selects the ChaCha stream, so
//! adding cells or runs never shifts the numbers another run sees.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a over a cell label; stable across platforms and builds.
pub fn cell_hash(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Generator for run `run` of the cell identified by `cell`.
pub fn stream(master_seed: u64, cell: u64, run: u64) -> Rng {
    let mut rng = Rng::seed_from_u64(mix64(master_seed ^ mix64(cell)));
    rng.set_stream(run);
    rng
}

/// Generator for a single stand-alone run.
pub fn from_seed(seed: u64) -> Rng {
    stream(seed, 0, 0)
}
