//! Plug-in entropy from sample counts, with Miller-style bias and variance terms.
//!
//! For `L` samples spread over `2^m` graphs the plug-in estimate `H̃`
//! underestimates the true entropy by roughly `E_sys = (2^m − 1)/(2L)` nats,
//! and fluctuates with standard deviation
//! `σ = sqrt((1/L) Σ (ln p̂ + H̃)² p̂ (1 − p̂))` nats. Both are stored in bits
//! alongside the entropy; the `_nats` accessors give the raw values.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{ErrorBars, GraphDistribution, Method, MAX_DENSE_NODES};
use crate::rng::derive_seed;
use crate::sampling::{sample_edge_counts, sample_sparse_counts, EnsembleSpec};
use crate::special::pair_count;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// Plug-in entropy H̃ in bits.
    pub entropy_bits: f64,
    /// E_sys in bits.
    pub systematic_error: f64,
    /// σ in bits.
    pub standard_error: f64,
    #[serde(rename = "L")]
    pub samples: u64,
}

impl EntropyEstimate {
    /// H̃ + E_sys.
    pub fn corrected_bits(&self) -> f64 {
        self.entropy_bits + self.systematic_error
    }

    pub fn systematic_error_nats(&self) -> f64 {
        self.systematic_error * LN_2
    }

    pub fn standard_error_nats(&self) -> f64 {
        self.standard_error * LN_2
    }

    pub fn error_bars(&self) -> ErrorBars {
        ErrorBars {
            systematic: self.systematic_error,
            standard: self.standard_error,
        }
    }
}

/// Estimate from a dense count vector indexed by graph mask (`2^m` entries).
pub fn estimate_entropy(counts: &[u64], l: u64) -> Result<EntropyEstimate> {
    if !counts.len().is_power_of_two() {
        return Err(Error::InvalidSpec(format!("count vector length {} is not a power of two", counts.len())));
    }
    estimate_from_iter(counts.iter().copied(), l, counts.len() as f64)
}

/// Estimate from the nonzero counts only, for an ensemble with `edge_slots`
/// edge slots (so `2^edge_slots` possible graphs).
pub fn estimate_entropy_sparse<I>(counts: I, l: u64, edge_slots: usize) -> Result<EntropyEstimate>
where
    I: IntoIterator<Item = u64>,
{
    estimate_from_iter(counts, l, 2f64.powi(edge_slots as i32))
}

fn estimate_from_iter<I>(counts: I, l: u64, outcomes: f64) -> Result<EntropyEstimate>
where
    I: IntoIterator<Item = u64>,
{
    let probs: Vec<f64> = {
        let raw: Vec<u64> = counts.into_iter().filter(|c| *c > 0).collect();
        let total: u64 = raw.iter().sum();
        if total == 0 || l == 0 {
            return Err(Error::EmptyCounts);
        }
        if total != l {
            return Err(Error::InvalidSpec(format!("counts sum to {total}, expected L = {l}")));
        }
        raw.into_iter().map(|c| c as f64 / l as f64).collect()
    };
    let lf = l as f64;
    let h_nats: f64 = -probs.iter().map(|p| p * p.ln()).sum::<f64>();
    let var_nats: f64 = probs
        .iter()
        .map(|&p| {
            let t = p.ln() + h_nats;
            t * t * p * (1.0 - p)
        })
        .sum::<f64>()
        / lf;
    let sys_nats = (outcomes - 1.0) / (2.0 * lf);
    Ok(EntropyEstimate {
        entropy_bits: (h_nats / LN_2).max(0.0),
        systematic_error: sys_nats / LN_2,
        standard_error: var_nats.max(0.0).sqrt() / LN_2,
        samples: l,
    })
}

/// Samples `l` graphs and summarises them as a Monte-Carlo [`GraphDistribution`].
///
/// For `n ≤ 7` the full probability vector is kept; above that only the
/// edge-count marginal and the plug-in entropy of the observed graphs.
pub fn sample_distribution(spec: &EnsembleSpec, l: u64, seed: u64) -> Result<(GraphDistribution, EntropyEstimate)> {
    let m = spec.edge_slots();
    if spec.n <= MAX_DENSE_NODES {
        let counts = crate::sampling::sample_counts(spec, l, seed)?;
        let est = estimate_entropy(&counts, l)?;
        let probs = counts.iter().map(|c| *c as f64 / l as f64).collect();
        let mut dist = GraphDistribution::from_probs(spec.n, Method::MonteCarlo, probs, Some(est.error_bars()))?;
        dist.entropy_bits = est.entropy_bits;
        Ok((dist, est))
    } else {
        let sparse = sample_sparse_counts(spec, l, seed)?;
        let est = estimate_entropy_sparse(sparse.values().copied(), l, m)?;
        let mut hist = vec![0.0; m + 1];
        for (mask, c) in &sparse {
            hist[mask.count_ones() as usize] += *c as f64 / l as f64;
        }
        let dist = GraphDistribution::from_edge_counts(spec.n, Method::MonteCarlo, hist, est.entropy_bits, Some(est.error_bars()))?;
        Ok((dist, est))
    }
}

/// Entropy estimate for one ensemble.
pub fn estimate_for_spec(spec: &EnsembleSpec, l: u64, seed: u64) -> Result<EntropyEstimate> {
    if l == 0 {
        return Err(Error::EmptyCounts);
    }
    if spec.n <= MAX_DENSE_NODES {
        let counts = crate::sampling::sample_counts(spec, l, seed)?;
        estimate_entropy(&counts, l)
    } else {
        let sparse = sample_sparse_counts(spec, l, seed)?;
        estimate_entropy_sparse(sparse.values().copied(), l, spec.edge_slots())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r0: f64,
    #[serde(flatten)]
    pub estimate: EntropyEstimate,
}

/// Entropy estimates over a grid of connection ranges. Grid point `i` is
/// sampled with the seed `derive_seed(seed, i)`.
pub fn entropy_curve(template: &EnsembleSpec, grid: &[f64], l: u64, seed: u64) -> Result<Vec<CurvePoint>> {
    if grid.is_empty() {
        return Err(Error::InvalidSpec("empty r0 grid".into()));
    }
    grid.iter()
        .enumerate()
        .map(|(i, &r0)| {
            let estimate = estimate_for_spec(&template.with_r0(r0), l, derive_seed(seed, i as u64))?;
            Ok(CurvePoint { r0, estimate })
        })
        .collect()
}

/// Empirical average connection probability and its standard error from an
/// edge-count histogram.
pub fn edge_density_from_histogram(n: usize, hist: &[u64]) -> (f64, f64) {
    let m = pair_count(n) as f64;
    let l: u64 = hist.iter().sum();
    let lf = l as f64;
    let (s, s2) = hist.iter().enumerate().fold((0.0, 0.0), |(s, s2), (k, c)| {
        let x = k as f64 / m;
        (s + x * *c as f64, s2 + x * x * *c as f64)
    });
    let mean = s / lf;
    let var = (s2 / lf - mean * mean).max(0.0);
    (mean, (var / lf).sqrt())
}

/// Empirical p̄ for an ensemble.
pub fn empirical_edge_density(spec: &EnsembleSpec, l: u64, seed: u64) -> Result<(f64, f64)> {
    let hist = sample_edge_counts(spec, l, seed)?;
    Ok(edge_density_from_histogram(spec.n, &hist))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CoordinateDistribution, Geometry};
    use crate::sampling::ConnectionModel;

    #[test]
    fn systematic_error_is_literal() {
        let mut counts = vec![0u64; 8];
        counts[0] = 100_000_000;
        let e = estimate_entropy(&counts, 100_000_000).unwrap();
        assert_eq!(e.systematic_error_nats(), 7.0 / 2e8);
        assert_eq!(e.systematic_error, 7.0 / 2e8 / LN_2);
    }

    #[test]
    fn point_mass_has_zero_entropy_and_spread() {
        let mut counts = vec![0u64; 8];
        counts[3] = 1000;
        let e = estimate_entropy(&counts, 1000).unwrap();
        assert_eq!(e.entropy_bits, 0.0);
        assert_eq!(e.standard_error, 0.0);
    }

    #[test]
    fn uniform_counts() {
        let l = 8_000_000;
        let e = estimate_entropy(&[1_000_000; 8], l).unwrap();
        assert!((e.entropy_bits - 3.0).abs() < 1e-15);
        // with p = 1/8, ln p + H̃ = 0 term by term
        let h = 8f64.ln();
        let direct = (8.0 * (0.125f64.ln() + h).powi(2) * 0.125 * 0.875 / l as f64).sqrt() / LN_2;
        assert!((e.standard_error - direct).abs() < 1e-18);
    }

    #[test]
    fn standard_error_by_hand() {
        let counts = [500u64, 300, 200, 0];
        let l = 1000;
        let p = [0.5f64, 0.3, 0.2];
        let h: f64 = -p.iter().map(|v| v * v.ln()).sum::<f64>();
        let var: f64 = p.iter().map(|v| (v.ln() + h).powi(2) * v * (1.0 - v)).sum::<f64>() / l as f64;
        let e = estimate_entropy(&counts, l).unwrap();
        assert!((e.standard_error_nats() - var.sqrt()).abs() < 1e-15);
        assert!((e.entropy_bits - h / LN_2).abs() < 1e-15);
        assert_eq!(e.systematic_error_nats(), 3.0 / 2000.0);
    }

    #[test]
    fn rejects_bad_counts() {
        assert!(matches!(estimate_entropy(&[0; 8], 0), Err(Error::EmptyCounts)));
        assert!(estimate_entropy(&[1, 2, 3, 4], 11).is_err());
        assert!(estimate_entropy(&[1, 2, 3], 6).is_err());
    }

    #[test]
    fn sparse_matches_dense() {
        let dense = [10u64, 0, 20, 5, 0, 0, 1, 4];
        let a = estimate_entropy(&dense, 40).unwrap();
        let b = estimate_entropy_sparse(dense.iter().copied().filter(|c| *c > 0), 40, 3).unwrap();
        assert_eq!(a, b);
    }

    fn torus_hard() -> EnsembleSpec {
        EnsembleSpec::new(Geometry::torus(1), 3, CoordinateDistribution::Uniform, ConnectionModel::Hard { r0: 0.1 })
    }

    #[test]
    fn curve_has_one_point_per_grid_value() {
        let c = entropy_curve(&torus_hard(), &[0.2], 1000, 1).unwrap();
        assert_eq!(c.len(), 1);
        assert!(entropy_curve(&torus_hard(), &[], 1000, 1).is_err());
        let c = entropy_curve(&torus_hard(), &[0.1, 0.25, 0.4], 200_000, 1).unwrap();
        let best = c.iter().max_by(|a, b| a.estimate.entropy_bits.total_cmp(&b.estimate.entropy_bits)).unwrap();
        assert_eq!(best.r0, 0.25);
    }

    #[test]
    fn standard_error_scales_with_root_l() {
        let spec = torus_hard().with_r0(0.2);
        let a = estimate_for_spec(&spec, 200_000, 5).unwrap();
        let b = estimate_for_spec(&spec, 400_000, 6).unwrap();
        let ratio = a.standard_error / b.standard_error;
        assert!((ratio / 2f64.sqrt() - 1.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn large_n_distribution_keeps_marginals_only() {
        let spec = EnsembleSpec::new(Geometry::cube(2), 8, CoordinateDistribution::Uniform, ConnectionModel::Hard { r0: 0.5 });
        let (dist, est) = sample_distribution(&spec, 20_000, 2).unwrap();
        assert!(dist.probs.is_none());
        assert_eq!(dist.edge_count_unnormalised.len(), 29);
        assert!((dist.edge_count_unnormalised.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(dist.entropy_bits, est.entropy_bits);
    }
}
