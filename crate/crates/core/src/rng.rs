//! Reproducible parallel random streams.
//!
//! A run with seed `s` and `L` replicates is cut into fixed-size blocks. Block
//! `b` draws from ChaCha8 keyed by `s` on stream `b`, so its output depends
//! only on `(s, b)` and never on which thread executes it or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Replicates per block.
pub const BLOCK_SIZE: u64 = 1 << 16;

/// The generator for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// SplitMix64 finaliser; used to derive independent child seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th sub-run (e.g. grid point) of a run seeded with `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x5EED)))
}

/// `(block index, replicates in block)` for a run of `total` replicates.
pub fn blocks(total: u64) -> impl IndexedParallelIterator<Item = (u64, u64)> {
    let n = total.div_ceil(BLOCK_SIZE) as usize;
    (0..n).into_par_iter().map(move |b| {
        let b = b as u64;
        let start = b * BLOCK_SIZE;
        (b, BLOCK_SIZE.min(total - start))
    })
}

/// Runs `work(rng, count)` on every block and returns the results in block
/// order. Use when the results are reduced with non-associative arithmetic.
pub fn map_blocks<T, F>(seed: u64, total: u64, work: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, u64) -> T + Sync + Send,
{
    blocks(total)
        .map(|(b, count)| work(&mut block_rng(seed, b), count))
        .collect()
}

/// Runs `work(rng, count)` on every block, `chunk` blocks at a time in
/// parallel, and folds the results into `init` strictly in block order.
///
/// Memory stays bounded by `chunk` partial results while floating-point
/// reductions remain independent of the thread count.
pub fn fold_blocks_ordered<T, A, W, G>(seed: u64, total: u64, chunk: usize, init: A, work: W, mut merge: G) -> A
where
    T: Send,
    W: Fn(&mut ChaCha8Rng, u64) -> T + Sync + Send,
    G: FnMut(&mut A, T),
{
    let n = total.div_ceil(BLOCK_SIZE) as usize;
    let chunk = chunk.max(1);
    let mut acc = init;
    let mut start = 0;
    while start < n {
        let end = (start + chunk).min(n);
        let parts: Vec<T> = (start..end)
            .into_par_iter()
            .map(|b| {
                let b = b as u64;
                work(&mut block_rng(seed, b), BLOCK_SIZE.min(total - b * BLOCK_SIZE))
            })
            .collect();
        for p in parts {
            merge(&mut acc, p);
        }
        start = end;
    }
    acc
}
