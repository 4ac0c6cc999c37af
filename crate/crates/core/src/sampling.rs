//! Hard and soft random geometric graph ensembles and their sampler.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counts::{count_masks, MaskCounts};
use crate::error::{Error, Result};
use crate::geometry::{squared_distance, CoordinateDistribution, CoordinateLaw, Geometry, GeometryKind};
use crate::graphs::{check_dense, check_nodes, LabeledGraph};
use crate::quadrature::Quadrature;
use crate::rng::{block_rng, blocks, map_blocks};
use crate::special::pair_count;

/// How pairs at distance `r` are connected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConnectionModel {
    /// Connect iff `r ≤ r0`.
    Hard { r0: f64 },
    /// Connect with probability `exp(−(r/r0)^η)`.
    Rayleigh { r0: f64, eta: f64 },
}

impl ConnectionModel {
    pub fn r0(&self) -> f64 {
        match *self {
            ConnectionModel::Hard { r0 } | ConnectionModel::Rayleigh { r0, .. } => r0,
        }
    }

    pub fn with_r0(&self, r0: f64) -> Self {
        match *self {
            ConnectionModel::Hard { .. } => ConnectionModel::Hard { r0 },
            ConnectionModel::Rayleigh { eta, .. } => ConnectionModel::Rayleigh { r0, eta },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let r0 = self.r0();
        if !(r0 >= 0.0 && r0.is_finite()) {
            return Err(Error::Domain {
                value: r0,
                domain: "r0 ≥ 0",
            });
        }
        if let ConnectionModel::Rayleigh { eta, .. } = *self {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::Domain {
                    value: eta,
                    domain: "eta > 0",
                });
            }
        }
        Ok(())
    }

    /// Connection probability at distance `r`.
    pub fn probability(&self, r: f64) -> f64 {
        match *self {
            ConnectionModel::Hard { r0 } => f64::from(u8::from(r <= r0)),
            ConnectionModel::Rayleigh { r0, eta } => rayleigh(r, r0, eta),
        }
    }

    /// Connection probability from the squared distance.
    #[inline]
    pub fn probability_sq(&self, r2: f64) -> f64 {
        match *self {
            ConnectionModel::Hard { r0 } => f64::from(u8::from(r2 <= r0 * r0)),
            ConnectionModel::Rayleigh { r0, eta } => {
                if r0 == 0.0 {
                    f64::from(u8::from(r2 == 0.0))
                } else {
                    (-(r2 / (r0 * r0)).powf(0.5 * eta)).exp()
                }
            }
        }
    }
}

fn rayleigh(r: f64, r0: f64, eta: f64) -> f64 {
    if r0 == 0.0 {
        return f64::from(u8::from(r == 0.0));
    }
    (-(r / r0).powf(eta)).exp()
}

/// Everything that defines an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub geometry: Geometry,
    pub n: usize,
    #[serde(default = "uniform")]
    pub distribution: CoordinateDistribution,
    pub connection: ConnectionModel,
}

fn uniform() -> CoordinateDistribution {
    CoordinateDistribution::Uniform
}

impl EnsembleSpec {
    pub fn new(geometry: Geometry, n: usize, distribution: CoordinateDistribution, connection: ConnectionModel) -> Self {
        EnsembleSpec {
            geometry,
            n,
            distribution,
            connection,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_nodes(self.n)?;
        if self.geometry.dimension == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        self.distribution.validate()?;
        self.connection.validate()
    }

    pub fn with_r0(&self, r0: f64) -> Self {
        EnsembleSpec {
            connection: self.connection.with_r0(r0),
            ..self.clone()
        }
    }

    pub fn edge_slots(&self) -> usize {
        pair_count(self.n)
    }

    pub fn prepare(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(Sampler {
            kind: self.geometry.kind,
            dim: self.geometry.dimension,
            n: self.n,
            law: self.distribution.prepare()?,
            connection: self.connection,
        })
    }
}

/// A validated spec with its coordinate law prepared for sampling.
#[derive(Debug, Clone)]
pub struct Sampler {
    kind: GeometryKind,
    dim: usize,
    n: usize,
    law: CoordinateLaw,
    connection: ConnectionModel,
}

impl Sampler {
    pub fn law(&self) -> &CoordinateLaw {
        &self.law
    }

    pub fn connection(&self) -> ConnectionModel {
        self.connection
    }

    /// Fills `buf` (resized to `n·d`) with node coordinates, node-major.
    pub fn sample_points<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<f64>) {
        buf.clear();
        buf.extend((0..self.n * self.dim).map(|_| self.law.sample(rng)));
    }

    /// Connects the points in `buf` under `connection`, drawing one uniform
    /// per pair for soft models.
    pub fn connect<R: Rng + ?Sized>(&self, points: &[f64], connection: ConnectionModel, rng: &mut R) -> u64 {
        let d = self.dim;
        let mut mask = 0u64;
        let mut slot = 0;
        for i in 0..self.n {
            let a = &points[i * d..(i + 1) * d];
            for j in i + 1..self.n {
                let b = &points[j * d..(j + 1) * d];
                let r2 = squared_distance(self.kind, a, b);
                let on = match connection {
                    ConnectionModel::Hard { r0 } => r2 <= r0 * r0,
                    soft => rng.random::<f64>() < soft.probability_sq(r2),
                };
                mask |= u64::from(on) << slot;
                slot += 1;
            }
        }
        mask
    }

    #[inline]
    fn draw_mask<R: Rng + ?Sized>(&self, rng: &mut R, buf: &mut Vec<f64>) -> u64 {
        self.sample_points(rng, buf);
        self.connect(buf, self.connection, rng)
    }

    pub fn sample_graph<R: Rng + ?Sized>(&self, rng: &mut R) -> LabeledGraph {
        let mut buf = Vec::with_capacity(self.n * self.dim);
        let mask = self.draw_mask(rng, &mut buf);
        LabeledGraph::new(self.n, mask).expect("sampler masks stay within the slot window")
    }

    /// Tallies `l` sampled graphs over the block streams of `seed`.
    pub fn count(&self, l: u64, seed: u64) -> MaskCounts {
        count_masks(pair_count(self.n), l, seed, || Vec::with_capacity(self.n * self.dim), |rng, buf| {
            self.draw_mask(rng, buf)
        })
    }
}

/// Draws one graph.
pub fn sample_graph<R: Rng + ?Sized>(spec: &EnsembleSpec, rng: &mut R) -> Result<LabeledGraph> {
    Ok(spec.prepare()?.sample_graph(rng))
}

/// Counts of each of the 2^C(n,2) graphs over `l` samples (`n ≤ 7`).
///
/// The result depends only on `(spec, l, seed)`, not on the thread count.
pub fn sample_counts(spec: &EnsembleSpec, l: u64, seed: u64) -> Result<Vec<u64>> {
    check_dense(spec.n)?;
    Ok(spec.prepare()?.count(l, seed).into_dense(spec.edge_slots()))
}

/// Counts of the graphs actually observed, keyed by mask. Works for any `n ≤ 11`.
pub fn sample_sparse_counts(spec: &EnsembleSpec, l: u64, seed: u64) -> Result<BTreeMap<u64, u64>> {
    Ok(match spec.prepare()?.count(l, seed) {
        MaskCounts::Dense(v) => v
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(k, c)| (k as u64, c))
            .collect(),
        MaskCounts::Sparse(m) => m,
    })
}

/// Histogram of edge counts over `l` samples (length C(n,2) + 1).
pub fn sample_edge_counts(spec: &EnsembleSpec, l: u64, seed: u64) -> Result<Vec<u64>> {
    let sampler = spec.prepare()?;
    let m = spec.edge_slots();
    Ok(blocks(l)
        .fold(
            || vec![0u64; m + 1],
            |mut acc, (b, count)| {
                let mut rng = block_rng(seed, b);
                let mut buf = Vec::with_capacity(sampler.n * sampler.dim);
                for _ in 0..count {
                    acc[sampler.draw_mask(&mut rng, &mut buf).count_ones() as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; m + 1],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        ))
}

/// Average connection probability p̄ with its standard error (zero when
/// computed by quadrature).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConnectionEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub by_quadrature: bool,
}

/// Pair draws used by the Monte-Carlo fallback of [`average_connection_probability`].
pub const PBAR_MC_PAIRS: u64 = 1 << 22;

/// p̄ = E[p(ρ(X, Y)/r0)] for two independent nodes.
///
/// Uses nested adaptive quadrature for uniform coordinates up to `d = 3` and
/// for any coordinate law at `d = 1`; otherwise falls back to Monte-Carlo over
/// [`PBAR_MC_PAIRS`] pairs seeded with `seed`.
pub fn average_connection_probability(spec: &EnsembleSpec, seed: u64) -> Result<ConnectionEstimate> {
    spec.validate()?;
    let law = spec.distribution.prepare()?;
    let quad = Quadrature::with_tol(1e-11);
    let d = spec.geometry.dimension;
    let quadrature = if law.is_uniform() && d <= 3 {
        Some(uniform_pbar(&quad, spec.geometry.kind, d, spec.connection)?)
    } else if d == 1 {
        Some(general_pbar_1d(&quad, &law, spec.geometry.kind, spec.connection)?)
    } else {
        None
    };
    if let Some(value) = quadrature {
        return Ok(ConnectionEstimate {
            value: value.clamp(0.0, 1.0),
            standard_error: 0.0,
            by_quadrature: true,
        });
    }
    let kind = spec.geometry.kind;
    let conn = spec.connection;
    let sums = map_blocks(seed, PBAR_MC_PAIRS, |rng, count| {
        let (mut s, mut s2) = (0.0, 0.0);
        let mut a = vec![0.0; d];
        let mut b = vec![0.0; d];
        for _ in 0..count {
            a.iter_mut().for_each(|x| *x = law.sample(rng));
            b.iter_mut().for_each(|x| *x = law.sample(rng));
            let p = conn.probability_sq(squared_distance(kind, &a, &b));
            s += p;
            s2 += p * p;
        }
        (s, s2)
    });
    let (s, s2) = sums.into_iter().fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
    let n = PBAR_MC_PAIRS as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0);
    Ok(ConnectionEstimate {
        value: mean,
        standard_error: (var / n).sqrt(),
        by_quadrature: false,
    })
}

/// Density of one coordinate difference and its support `[0, u_max]`.
fn difference_law(kind: GeometryKind) -> (fn(f64) -> f64, fn(f64) -> f64, f64) {
    match kind {
        // |X − Y| for uniform X, Y has density 2(1 − u); CDF 2u − u²
        GeometryKind::Cube => (|u| 2.0 * (1.0 - u), |a| 2.0 * a - a * a, 1.0),
        // wrapped difference is uniform on [0, ½]
        GeometryKind::Torus => (|_| 2.0, |a| 2.0 * a, 0.5),
    }
}

fn uniform_pbar(quad: &Quadrature, kind: GeometryKind, d: usize, conn: ConnectionModel) -> Result<f64> {
    let (f, cdf, umax) = difference_law(kind);
    match conn {
        ConnectionModel::Hard { r0 } => hard_level(quad, f, cdf, umax, d, r0 * r0),
        soft => soft_level(quad, f, umax, d, 0.0, soft),
    }
}

// P(Σ_{k<levels} U_k² ≤ budget) for i.i.d. differences U_k
fn hard_level(quad: &Quadrature, f: fn(f64) -> f64, cdf: fn(f64) -> f64, umax: f64, levels: usize, budget: f64) -> Result<f64> {
    if budget <= 0.0 {
        return Ok(if budget == 0.0 && levels > 0 { 0.0 } else { 0.0 });
    }
    if budget >= levels as f64 * umax * umax {
        return Ok(1.0);
    }
    if levels == 1 {
        return Ok(cdf(budget.sqrt().min(umax)));
    }
    let breaks: Vec<f64> = (0..levels)
        .map(|j| budget - j as f64 * umax * umax)
        .filter(|s| *s > 0.0)
        .map(f64::sqrt)
        .collect();
    quad.try_integrate(
        |u| Ok(f(u) * hard_level(quad, f, cdf, umax, levels - 1, budget - u * u)?),
        0.0,
        umax,
        &breaks,
    )
}

fn soft_level(quad: &Quadrature, f: fn(f64) -> f64, umax: f64, levels: usize, acc: f64, conn: ConnectionModel) -> Result<f64> {
    if levels == 0 {
        return Ok(conn.probability_sq(acc));
    }
    quad.try_integrate(|u| Ok(f(u) * soft_level(quad, f, umax, levels - 1, acc + u * u, conn)?), 0.0, umax, &[])
}

fn general_pbar_1d(quad: &Quadrature, law: &CoordinateLaw, kind: GeometryKind, conn: ConnectionModel) -> Result<f64> {
    let r0 = conn.r0();
    let outer_breaks = [r0, 1.0 - r0, 0.5];
    law.expect(
        quad,
        |x| {
            let mut breaks = vec![x];
            match kind {
                GeometryKind::Cube => breaks.extend([x - r0, x + r0]),
                GeometryKind::Torus => breaks.extend([x - r0, x + r0, x - 1.0 + r0, x + 1.0 - r0, x - 0.5, x + 0.5]),
            }
            law.expect(
                quad,
                |y| {
                    let r = match kind {
                        GeometryKind::Cube => (x - y).abs(),
                        GeometryKind::Torus => crate::geometry::wrap(x - y),
                    };
                    Ok(conn.probability(r))
                },
                &breaks,
            )
        },
        &outer_breaks,
    )
}
