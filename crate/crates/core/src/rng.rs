//! Counter-based randomness for order-independent simulation.
//!
//! Trajectory `i` of a run keyed by `seed` reads stream `i` of a ChaCha8
//! generator keyed by `seed`; step `s` consumes the next words of that
//! stream. Output for a trajectory is thus a pure function of
//! `(seed, trajectory, step)` and does not depend on which worker runs it.

use std::ops::Range;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Stream offset separating auxiliary passes (e.g. a second martingale run
/// from a different start) from the main trajectories of the same seed.
pub const AUX_STREAM: u64 = 1 << 40;

pub struct TrajectoryRng {
    inner: ChaCha8Rng,
    bits: u64,
    left: u32,
}

impl TrajectoryRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        TrajectoryRng {
            inner,
            bits: 0,
            left: 0,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// One fair bit, drawn from a buffered word.
    #[inline]
    pub fn next_bit(&mut self) -> bool {
        if self.left == 0 {
            self.bits = self.inner.next_u64();
            self.left = 64;
        }
        let b = self.bits & 1 == 1;
        self.bits >>= 1;
        self.left -= 1;
        b
    }
}

fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

fn chunk_ranges(n_items: usize, chunk: usize) -> Vec<Range<usize>> {
    let chunk = chunk.max(1);
    (0..n_items.div_ceil(chunk))
        .map(|c| c * chunk..((c + 1) * chunk).min(n_items))
        .collect()
}

/// Maps fixed-size chunks of `0..n_items` in parallel and returns the results
/// in chunk order. The chunking is independent of `workers` (0 = rayon's
/// default pool), so any order-sensitive reduction of the output is stable.
pub fn map_chunks<T, F>(n_items: usize, chunk: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<usize>) -> T + Sync + Send,
{
    let ranges = chunk_ranges(n_items, chunk);
    with_pool(workers, || ranges.into_par_iter().map(&f).collect())
}

/// Folds chunks into per-worker accumulators and merges them. Only sound for
/// associative, commutative merges (integer counts).
pub fn fold_chunks<A, I, F, M>(n_items: usize, chunk: usize, workers: usize, init: I, f: F, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync + Send,
    F: Fn(&mut A, Range<usize>) + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let ranges = chunk_ranges(n_items, chunk);
    with_pool(workers, || {
        ranges
            .into_par_iter()
            .fold(&init, |mut acc, r| {
                f(&mut acc, r);
                acc
            })
            .reduce(&init, &merge)
    })
}
