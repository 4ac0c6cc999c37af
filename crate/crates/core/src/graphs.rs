//! Labelled graphs as edge bitmasks, and distributions over them.
//!
//! Edge slots are the pairs `(i, j)` with `i < j`, in lexicographic order:
//! `(0,1), (0,2), …, (0,n−1), (1,2), …`. Slot `k` is bit `k` of the mask.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{binomial, pair_count, plogp_bits};

/// Largest supported node count (55 edge slots).
pub const MAX_NODES: usize = 11;
/// Largest node count for which full probability vectors are stored.
pub const MAX_DENSE_NODES: usize = 7;

/// Index of the edge slot `(i, j)`, `i < j < n`.
#[inline]
pub fn slot_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// The node pairs in slot order.
pub fn slot_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

pub(crate) fn check_nodes(n: usize) -> Result<()> {
    if !(2..=MAX_NODES).contains(&n) {
        return Err(Error::InvalidSpec(format!("node count {n} outside 2..={MAX_NODES}")));
    }
    Ok(())
}

pub(crate) fn check_dense(n: usize) -> Result<()> {
    check_nodes(n)?;
    if n > MAX_DENSE_NODES {
        return Err(Error::TooManyNodes {
            n,
            limit: MAX_DENSE_NODES,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabeledGraph {
    n: u8,
    mask: u64,
}

impl LabeledGraph {
    pub fn new(n: usize, mask: u64) -> Result<Self> {
        check_nodes(n)?;
        if mask & !full_mask(n) != 0 {
            return Err(Error::InvalidSpec(format!("mask {mask:#b} has bits beyond slot {}", pair_count(n) - 1)));
        }
        Ok(LabeledGraph { n: n as u8, mask })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    pub fn complete(n: usize) -> Result<Self> {
        check_nodes(n)?;
        Self::new(n, full_mask(n))
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        check_nodes(n)?;
        let mut mask = 0;
        for &(a, b) in edges {
            let (i, j) = (a.min(b), a.max(b));
            if i == j || j >= n {
                return Err(Error::InvalidSpec(format!("invalid edge ({a}, {b}) for n = {n}")));
            }
            mask |= 1 << slot_index(n, i, j);
        }
        Ok(LabeledGraph { n: n as u8, mask })
    }

    pub fn nodes(&self) -> usize {
        self.n as usize
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        let (i, j) = (i.min(j), i.max(j));
        i != j && self.mask >> slot_index(self.nodes(), i, j) & 1 == 1
    }

    pub fn complement(&self) -> Self {
        LabeledGraph {
            n: self.n,
            mask: !self.mask & full_mask(self.nodes()),
        }
    }

    pub fn edge_count(&self) -> u32 {
        self.mask.count_ones()
    }

    /// The graph with node `i` renamed to `perm[i]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let n = self.nodes();
        assert_eq!(perm.len(), n);
        let mut mask = 0;
        for (k, (i, j)) in slot_pairs(n).into_iter().enumerate() {
            if self.mask >> k & 1 == 1 {
                let (a, b) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
                mask |= 1 << slot_index(n, a, b);
            }
        }
        LabeledGraph { n: self.n, mask }
    }
}

/// Mask with all C(n,2) slots set.
pub fn full_mask(n: usize) -> u64 {
    let m = pair_count(n);
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    MonteCarlo,
    GaussianLimit,
    Edgeworth,
}

/// Error bars attached to an entropy estimate, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBars {
    pub systematic: f64,
    pub standard: f64,
}

/// A distribution over the labelled graphs on `n` nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDistribution {
    pub n: usize,
    pub method: Method,
    /// `probs[mask]`; absent for `n > 7`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub probs: Option<Vec<f64>>,
    pub edge_count_unnormalised: Vec<f64>,
    pub edge_count_normalised: Vec<f64>,
    pub entropy_bits: f64,
    pub error: Option<ErrorBars>,
    /// Total negative mass removed before renormalisation (Edgeworth only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clamped_mass: Option<f64>,
    /// Sum of the probabilities before renormalisation (Edgeworth only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub raw_total: Option<f64>,
}

impl GraphDistribution {
    /// Wraps a dense probability vector. Negative entries are clamped to 0
    /// and the vector is renormalised; the removed mass is stored in
    /// `clamped_mass` when nonzero.
    pub fn from_probs(n: usize, method: Method, mut probs: Vec<f64>, error: Option<ErrorBars>) -> Result<Self> {
        check_dense(n)?;
        if probs.len() != 1 << pair_count(n) {
            return Err(Error::DimensionMismatch {
                expected: 1 << pair_count(n),
                got: probs.len(),
            });
        }
        let clamped: f64 = probs.iter().filter(|p| **p < 0.0).map(|p| -p).sum();
        if clamped > 0.0 {
            probs.iter_mut().for_each(|p| *p = p.max(0.0));
        }
        let total: f64 = probs.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::EmptyCounts);
        }
        if (total - 1.0).abs() > 1e-15 {
            probs.iter_mut().for_each(|p| *p /= total);
        }
        let unnormalised = edge_count_histogram(n, &probs);
        Ok(GraphDistribution {
            n,
            method,
            edge_count_normalised: normalise_by_class_size(n, &unnormalised),
            edge_count_unnormalised: unnormalised,
            entropy_bits: entropy_of(&probs),
            error,
            clamped_mass: (clamped > 0.0).then_some(clamped),
            probs: Some(probs),
            raw_total: None,
        })
    }

    /// Builds a distribution known only through its edge-count marginal and
    /// an externally estimated entropy (used for `n > 7`).
    pub fn from_edge_counts(
        n: usize,
        method: Method,
        unnormalised: Vec<f64>,
        entropy_bits: f64,
        error: Option<ErrorBars>,
    ) -> Result<Self> {
        check_nodes(n)?;
        if unnormalised.len() != pair_count(n) + 1 {
            return Err(Error::DimensionMismatch {
                expected: pair_count(n) + 1,
                got: unnormalised.len(),
            });
        }
        Ok(GraphDistribution {
            n,
            method,
            probs: None,
            edge_count_normalised: normalise_by_class_size(n, &unnormalised),
            edge_count_unnormalised: unnormalised,
            entropy_bits,
            error,
            clamped_mass: None,
            raw_total: None,
        })
    }

    pub fn prob(&self, g: LabeledGraph) -> Option<f64> {
        self.probs.as_ref().map(|p| p[g.mask() as usize])
    }

    /// Average connection probability Σ |E(g)| P(g) / C(n,2).
    pub fn mean_edge_density(&self) -> f64 {
        let m = pair_count(self.n) as f64;
        self.edge_count_unnormalised
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum::<f64>()
            / m
    }

    /// P(slot `k` present). Requires the dense vector.
    pub fn slot_marginal(&self, k: usize) -> Option<f64> {
        self.probs.as_ref().map(|p| {
            p.iter()
                .enumerate()
                .filter(|(mask, _)| mask >> k & 1 == 1)
                .map(|(_, v)| v)
                .sum()
        })
    }
}

/// −Σ p log₂ p with negative entries treated as 0. Returns `(entropy, clamped mass)`.
pub fn entropy(dist: &GraphDistribution) -> (f64, f64) {
    match &dist.probs {
        Some(p) => (entropy_of(p), p.iter().filter(|v| **v < 0.0).map(|v| -v).sum::<f64>() + dist.clamped_mass.unwrap_or(0.0)),
        None => (dist.entropy_bits, dist.clamped_mass.unwrap_or(0.0)),
    }
}

/// Entropy in bits of a probability vector, ignoring non-positive entries.
pub fn entropy_of(probs: &[f64]) -> f64 {
    probs.iter().map(|&p| plogp_bits(p)).sum()
}

/// `(unnormalised, normalised)` edge-count marginals.
pub fn edge_count_marginals(dist: &GraphDistribution) -> (Vec<f64>, Vec<f64>) {
    (dist.edge_count_unnormalised.clone(), dist.edge_count_normalised.clone())
}

fn edge_count_histogram(n: usize, probs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pair_count(n) + 1];
    for (mask, p) in probs.iter().enumerate() {
        out[(mask as u64).count_ones() as usize] += p;
    }
    out
}

fn normalise_by_class_size(n: usize, unnormalised: &[f64]) -> Vec<f64> {
    let m = pair_count(n) as u64;
    unnormalised
        .iter()
        .enumerate()
        .map(|(k, p)| p / binomial(m, k as u64) as f64)
        .collect()
}

/// The product distribution G(n, p) as a dense vector.
pub fn erdos_renyi_probs(n: usize, p: f64) -> Result<Vec<f64>> {
    check_dense(n)?;
    let m = pair_count(n) as i32;
    Ok((0..1u64 << m)
        .map(|mask| {
            let k = mask.count_ones() as i32;
            p.powi(k) * (1.0 - p).powi(m - k)
        })
        .collect())
}
