//! Reproducible random streams.
//!
//! Every run owns a [`Stream`] derived from `(master_seed, run_index)` with a
//! splitmix64 mix, so batch results do not depend on scheduling. Labels such
//! as graph-family names are folded in with 64-bit FNV-1a.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Human-readable description written into output metadata.
pub const GENERATOR: &str = "ChaCha8Rng; seed = splitmix64 chain over (master_seed, indices...)";

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Folds a sequence of indices into a master seed.
pub fn derive_seed(master_seed: u64, indices: &[u64]) -> u64 {
    indices
        .iter()
        .fold(splitmix64(master_seed), |acc, &i| splitmix64(acc ^ splitmix64(i)))
}

pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream for run `run_index` of a batch keyed by `master_seed`.
pub fn run_stream(master_seed: u64, run_index: u64) -> Stream {
    stream(derive_seed(master_seed, &[run_index]))
}

/// Tag reserved for draws that are shared by every run of a campaign
/// (random thresholds, random graphs).
pub const SHARED_TAG: u64 = u64::MAX;

pub fn shared_stream(master_seed: u64, purpose: &str) -> Stream {
    stream(derive_seed(master_seed, &[SHARED_TAG, fnv1a(purpose)]))
}

/// `n` i.i.d. draws from the open unit interval, shared across a campaign.
pub fn shared_uniform(master_seed: u64, purpose: &str, n: usize) -> Vec<f64> {
    let mut rng = shared_stream(master_seed, purpose);
    (0..n).map(|_| rng.sample(Open01)).collect()
}
