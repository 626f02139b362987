//! Counter-based replicate streams: every replicate owns an independent
//! ChaCha stream derived from (master seed, replicate index), so batches
//! are reproducible bit-for-bit regardless of worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// The RNG stream for one replicate of a seeded experiment.
pub fn replicate_rng(master_seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replicate);
    rng
}

/// Run `n` replicates in parallel. Results come back ordered by replicate
/// index, so any fold over them is deterministic.
pub fn par_replicates<T, F>(n: u64, master_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ChaCha8Rng) -> T + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(master_seed, i);
            f(i, &mut rng)
        })
        .collect()
}
