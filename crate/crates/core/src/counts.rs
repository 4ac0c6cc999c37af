//! Graph-mask tallies accumulated over parallel sample blocks.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::rng::{block_rng, blocks};

/// Slot counts up to which tallies use a dense vector.
pub const DENSE_COUNT_SLOTS: usize = 15;

#[derive(Debug, Clone, PartialEq)]
pub enum MaskCounts {
    Dense(Vec<u64>),
    Sparse(BTreeMap<u64, u64>),
}

impl MaskCounts {
    pub fn new(slots: usize) -> Self {
        if slots <= DENSE_COUNT_SLOTS {
            MaskCounts::Dense(vec![0; 1 << slots])
        } else {
            MaskCounts::Sparse(BTreeMap::new())
        }
    }

    #[inline]
    pub fn add(&mut self, mask: u64) {
        match self {
            MaskCounts::Dense(v) => v[mask as usize] += 1,
            MaskCounts::Sparse(m) => *m.entry(mask).or_insert(0) += 1,
        }
    }

    pub fn merge(&mut self, other: MaskCounts) {
        match (self, other) {
            (MaskCounts::Dense(a), MaskCounts::Dense(b)) => a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
            (MaskCounts::Sparse(a), MaskCounts::Sparse(b)) => {
                for (k, v) in b {
                    *a.entry(k).or_insert(0) += v;
                }
            }
            _ => unreachable!("tallies of one run share a representation"),
        }
    }

    pub fn total(&self) -> u64 {
        self.nonzero().map(|(_, c)| c).sum()
    }

    /// `(mask, count)` for every observed mask, in increasing mask order.
    pub fn nonzero(&self) -> Box<dyn Iterator<Item = (u64, u64)> + '_> {
        match self {
            MaskCounts::Dense(v) => Box::new(v.iter().enumerate().filter(|(_, c)| **c > 0).map(|(k, c)| (k as u64, *c))),
            MaskCounts::Sparse(m) => Box::new(m.iter().map(|(k, c)| (*k, *c))),
        }
    }

    /// Full count vector of length `2^slots`.
    pub fn into_dense(self, slots: usize) -> Vec<u64> {
        match self {
            MaskCounts::Dense(v) => v,
            MaskCounts::Sparse(m) => {
                let mut v = vec![0; 1 << slots];
                for (k, c) in m {
                    v[k as usize] = c;
                }
                v
            }
        }
    }

    /// Histogram of edge counts (length `slots + 1`).
    pub fn edge_histogram(&self, slots: usize) -> Vec<u64> {
        let mut h = vec![0; slots + 1];
        for (mask, c) in self.nonzero() {
            h[mask.count_ones() as usize] += c;
        }
        h
    }
}

/// Tallies `total` masks produced by `draw`, run over the block streams of
/// `seed`. `scratch` is a per-block buffer handed to `draw`.
///
/// Integer tallies make the result independent of the thread count.
pub fn count_masks<S, F>(slots: usize, total: u64, seed: u64, scratch: impl Fn() -> S + Sync + Send, draw: F) -> MaskCounts
where
    F: Fn(&mut ChaCha8Rng, &mut S) -> u64 + Sync + Send,
{
    blocks(total)
        .fold(
            || MaskCounts::new(slots),
            |mut acc, (b, count)| {
                let mut rng = block_rng(seed, b);
                let mut buf = scratch();
                for _ in 0..count {
                    acc.add(draw(&mut rng, &mut buf));
                }
                acc
            },
        )
        .reduce(
            || MaskCounts::new(slots),
            |mut a, b| {
                a.merge(b);
                a
            },
        )
}
