//! Per-sample random substreams.
//!
//! Sample `i` of a run seeded with `seed` draws from ChaCha8 stream `i`, so
//! Monte Carlo results do not depend on how samples are split across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::Parallelism;

/// Generator for sample `index` of the run seeded with `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for an independent sub-task (different estimator, different
/// purpose) of a run. SplitMix64 finalizer.
pub fn derive_seed(seed: u64, purpose: u64) -> u64 {
    let mut x = seed ^ purpose.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Evaluate `f(i, rng_i)` for every sample, returning values in index order.
pub fn map_samples<T, F>(count: usize, seed: u64, mode: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &mut ChaCha8Rng) -> T + Sync,
{
    let run = |i: usize| f(i, &mut substream(seed, i as u64));
    match mode {
        Parallelism::Serial => (0..count).map(run).collect(),
        Parallelism::Threads => (0..count).into_par_iter().map(run).collect(),
    }
}
