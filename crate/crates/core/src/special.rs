//! Small special functions shared across modules.

use std::f64::consts::{LN_2, SQRT_2};

/// Standard normal CDF Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Binomial coefficient as `u64` (exact for the sizes used here).
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of unordered node pairs, C(n, 2).
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// `-p log₂ p` with the convention `0 log 0 = 0`.
pub fn plogp_bits(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Binary entropy h₂(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    plogp_bits(p) + plogp_bits(1.0 - p)
}

pub fn nats_to_bits(x: f64) -> f64 {
    x / LN_2
}
