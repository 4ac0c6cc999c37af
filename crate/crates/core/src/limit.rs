//! The high-dimensional limit.
//!
//! With `q_ij = (ρ(X_i, X_j)² − μ d)/√d`, the vector of centred squared
//! distances tends to a Gaussian `N(0, Σ)` as `d → ∞`. `Σ` has `α` on the
//! diagonal, `β` between pairs sharing one node and `γ = 0` between disjoint
//! pairs. A hard connection range `r0` with `r0² = μ d + t √d` connects a pair
//! iff `q_ij ≤ t`, so each graph is the probability of one orthant-like region.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::counts::{count_masks, MaskCounts};
use crate::edgeworth::ThirdMoments;
use crate::error::{Error, Result};
use crate::geometry::{wrap, CoordinateDistribution, CoordinateLaw, GeometryKind};
use crate::graphs::{self, check_nodes, slot_pairs, GraphDistribution, Method, MAX_DENSE_NODES};
use crate::mc_entropy::{estimate_entropy, estimate_entropy_sparse};
use crate::quadrature::Quadrature;
use crate::sampling::ConnectionModel;
use crate::special::{binary_entropy, binomial, normal_cdf, pair_count};

/// |β| below this counts as zero.
pub const BETA_ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceModel {
    pub geometry_kind: GeometryKind,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub third_moments: Option<ThirdMoments>,
}

pub(crate) fn inner_quadrature() -> Quadrature {
    Quadrature {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        max_intervals: 4000,
    }
}

/// Squared per-coordinate distance.
#[inline]
pub(crate) fn coord_sq(kind: GeometryKind, x: f64, y: f64) -> f64 {
    let u = match kind {
        GeometryKind::Cube => x - y,
        GeometryKind::Torus => wrap(x - y),
    };
    u * u
}

/// Kinks of `y ↦ coord_sq(kind, x, y)`.
pub(crate) fn kinks(kind: GeometryKind, x: f64) -> Vec<f64> {
    match kind {
        GeometryKind::Cube => vec![x],
        GeometryKind::Torus => vec![x, x - 0.5, x + 0.5],
    }
}

/// μ, and `F(x) = E_Y[coord_sq(x, Y)] − μ`, evaluated by quadrature.
pub(crate) struct PairMoments<'a> {
    pub kind: GeometryKind,
    pub law: &'a CoordinateLaw,
    pub mu: f64,
    quad: Quadrature,
}

impl<'a> PairMoments<'a> {
    pub fn new(kind: GeometryKind, law: &'a CoordinateLaw) -> Result<Self> {
        let quad = inner_quadrature();
        let mu = law.expect(&quad, |x| law.expect(&quad, |y| Ok(coord_sq(kind, x, y)), &kinks(kind, x)), &[0.5])?;
        Ok(PairMoments { kind, law, mu, quad })
    }

    pub fn quad(&self) -> &Quadrature {
        &self.quad
    }

    /// Centred squared distance g(x, y).
    #[inline]
    pub fn g(&self, x: f64, y: f64) -> f64 {
        coord_sq(self.kind, x, y) - self.mu
    }

    /// E_Y[h(g(x, Y), Y)].
    pub fn over_y<H>(&self, x: f64, mut h: H) -> Result<f64>
    where
        H: FnMut(f64, f64) -> Result<f64>,
    {
        self.law.expect(&self.quad, |y| h(self.g(x, y), y), &kinks(self.kind, x))
    }

    pub fn f(&self, x: f64) -> Result<f64> {
        self.over_y(x, |g, _| Ok(g))
    }
}

impl CovarianceModel {
    /// Exact constants for uniform coordinates.
    pub fn uniform(kind: GeometryKind) -> Self {
        let (mu, alpha, beta) = match kind {
            GeometryKind::Cube => (1.0 / 6.0, 7.0 / 180.0, 1.0 / 180.0),
            GeometryKind::Torus => (1.0 / 12.0, 1.0 / 180.0, 0.0),
        };
        CovarianceModel {
            geometry_kind: kind,
            mu,
            alpha,
            beta,
            gamma: 0.0,
            third_moments: None,
        }
    }

    /// Attaches the third-order moments used by the Edgeworth correction.
    pub fn with_third_moments(mut self, dist: &CoordinateDistribution) -> Result<Self> {
        self.third_moments = Some(crate::edgeworth::third_moments(self.geometry_kind, dist)?);
        Ok(self)
    }

    /// True when Σ is diagonal, so graphs are Erdős–Rényi in the limit.
    pub fn is_product_form(&self) -> bool {
        self.beta.abs() < BETA_ZERO_TOL && self.gamma.abs() < BETA_ZERO_TOL
    }

    /// The C(n,2)×C(n,2) covariance matrix in slot order.
    pub fn matrix(&self, n: usize) -> DMatrix<f64> {
        let pairs = slot_pairs(n);
        let m = pairs.len();
        DMatrix::from_fn(m, m, |a, b| {
            let (i, j) = pairs[a];
            let (k, l) = pairs[b];
            let shared = usize::from(i == k || i == l) + usize::from(j == k || j == l);
            match shared {
                2 => self.alpha,
                1 => self.beta,
                _ => self.gamma,
            }
        })
    }

    /// Distinct eigenvalues of [`CovarianceModel::matrix`] (with γ = 0) and
    /// their multiplicities.
    pub fn eigenvalues(&self, n: usize) -> Vec<(f64, usize)> {
        let nf = n as f64;
        let mut v = vec![(self.alpha + 2.0 * (nf - 2.0) * self.beta, 1)];
        if n >= 3 {
            v.push((self.alpha + (nf - 4.0) * self.beta, n - 1));
        }
        if n >= 4 {
            v.push((self.alpha - 2.0 * self.beta, n * (n - 3) / 2));
        }
        v
    }

    /// Finite-d normalised range `t_d = r0²/√d − μ √d`.
    pub fn normalised_range(&self, r0: f64, d: usize) -> Result<NormalisedRange> {
        if !(r0 >= 0.0) {
            return Err(Error::Domain {
                value: r0,
                domain: "r0 ≥ 0",
            });
        }
        check_dimension(d)?;
        let sd = (d as f64).sqrt();
        Ok(NormalisedRange {
            t: r0 * r0 / sd - self.mu * sd,
        })
    }

    /// Radius realising normalised range `t` at dimension `d`:
    /// `sqrt(μ d + t √d)`.
    pub fn r0_for_t(&self, t: f64, d: usize) -> Result<f64> {
        check_dimension(d)?;
        let df = d as f64;
        let s = self.mu * df + t * df.sqrt();
        if s < 0.0 || s.is_nan() {
            return Err(Error::NoValidRadius { t, d });
        }
        Ok(s.sqrt())
    }

    /// Limiting per-edge probability Φ(t/√α).
    pub fn edge_probability(&self, t: f64) -> f64 {
        normal_cdf(t / self.alpha.sqrt())
    }
}

fn check_dimension(d: usize) -> Result<()> {
    if d == 0 {
        return Err(Error::InvalidSpec("dimension must be at least 1".into()));
    }
    Ok(())
}

/// The centred range `t`; may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalisedRange {
    pub t: f64,
}

/// μ, α, β, γ for i.i.d. coordinates with law `dist`.
///
/// The cube uses the closed forms `μ = 2σ²`, `α = 2c₄ + 2σ⁴`, `β = c₄ − σ⁴`
/// in the central moments σ², c₄ of one coordinate. The torus integrates the
/// wrapped distance directly.
pub fn covariance_model(kind: GeometryKind, dist: &CoordinateDistribution) -> Result<CovarianceModel> {
    if matches!(dist, CoordinateDistribution::Uniform) {
        return Ok(CovarianceModel::uniform(kind));
    }
    match kind {
        GeometryKind::Cube => {
            let law = dist.prepare()?;
            let q = inner_quadrature();
            let c2 = law.central_moment(&q, 2)?;
            let c4 = law.central_moment(&q, 4)?;
            Ok(CovarianceModel {
                geometry_kind: kind,
                mu: 2.0 * c2,
                alpha: 2.0 * c4 + 2.0 * c2 * c2,
                beta: c4 - c2 * c2,
                gamma: 0.0,
                third_moments: None,
            })
        }
        GeometryKind::Torus => covariance_model_by_quadrature(kind, dist),
    }
}

/// μ, α, β, γ from their defining integrals, for either geometry.
///
/// `γ` is reported as `(E F)²`, which vanishes up to quadrature error.
pub fn covariance_model_by_quadrature(kind: GeometryKind, dist: &CoordinateDistribution) -> Result<CovarianceModel> {
    let law = dist.prepare()?;
    let pm = PairMoments::new(kind, &law)?;
    let q = *pm.quad();
    let alpha = law.expect(&q, |x| pm.over_y(x, |g, _| Ok(g * g)), &[0.5])?;
    let beta = law.expect(
        &q,
        |x| {
            let f = pm.f(x)?;
            Ok(f * f)
        },
        &[0.5],
    )?;
    let mean_f = law.expect(&q, |x| pm.f(x), &[0.5])?;
    Ok(CovarianceModel {
        geometry_kind: kind,
        mu: pm.mu,
        alpha,
        beta,
        gamma: mean_f * mean_f,
        third_moments: None,
    })
}

/// Fourth central moment over squared variance.
pub fn kurtosis(dist: &CoordinateDistribution) -> Result<f64> {
    let law = dist.prepare()?;
    let q = inner_quadrature();
    let c2 = law.central_moment(&q, 2)?;
    if c2 <= 1e-300 {
        return Err(Error::Domain {
            value: c2,
            domain: "variance > 0 (the coordinate law is almost surely constant)",
        });
    }
    Ok(law.central_moment(&q, 4)? / (c2 * c2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErConvergence {
    pub converges: bool,
    pub beta: f64,
    pub kurtosis: f64,
}

/// Whether the limiting hard ensemble at `t = 0` is Erdős–Rényi, i.e. β = 0.
pub fn converges_to_er(kind: GeometryKind, dist: &CoordinateDistribution) -> Result<ErConvergence> {
    let model = covariance_model(kind, dist)?;
    Ok(ErConvergence {
        converges: model.beta.abs() < BETA_ZERO_TOL,
        beta: model.beta,
        kurtosis: kurtosis(dist)?,
    })
}

/// `t_d` for a radius, building the covariance model from the coordinate law.
pub fn normalised_range(kind: GeometryKind, dist: &CoordinateDistribution, r0: f64, d: usize) -> Result<NormalisedRange> {
    covariance_model(kind, dist)?.normalised_range(r0, d)
}

/// Inverse of [`normalised_range`].
pub fn r0_for_t(kind: GeometryKind, dist: &CoordinateDistribution, t: f64, d: usize) -> Result<f64> {
    covariance_model(kind, dist)?.r0_for_t(t, d)
}

/// Correlated Gaussian draws `q = L z` for the slot covariance of `n` nodes.
#[derive(Debug, Clone)]
pub struct GaussianSlots {
    m: usize,
    /// Row-major lower Cholesky factor.
    chol: Vec<f64>,
}

impl GaussianSlots {
    pub fn new(model: &CovarianceModel, n: usize) -> Result<Self> {
        check_nodes(n)?;
        let sigma = model.matrix(n);
        let m = sigma.nrows();
        let chol = sigma.clone().cholesky().ok_or_else(|| {
            let min = sigma.symmetric_eigenvalues().min();
            Error::NotPositiveDefinite(format!("smallest eigenvalue {min:e} for n = {n}"))
        })?;
        let l = chol.l();
        let mut flat = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..=i {
                flat[i * m + j] = l[(i, j)];
            }
        }
        Ok(GaussianSlots { m, chol: flat })
    }

    pub fn slots(&self) -> usize {
        self.m
    }

    /// Fills `q` (length m) with one draw; `z` is scratch of length m.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], q: &mut [f64]) {
        let m = self.m;
        for v in z.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        for i in 0..m {
            let row = &self.chol[i * m..i * m + i + 1];
            q[i] = row.iter().zip(&z[..=i]).map(|(a, b)| a * b).sum();
        }
    }
}

/// Edge mask of a slot vector: slot `k` present iff `q_k ≤ t`.
#[inline]
pub fn orthant_mask(q: &[f64], t: f64) -> u64 {
    q.iter().enumerate().fold(0u64, |acc, (k, v)| acc | (u64::from(*v <= t) << k))
}

/// Monte-Carlo tallies of the limiting graph over `draws` Gaussian samples.
pub fn gaussian_limit_counts(model: &CovarianceModel, n: usize, t: f64, draws: u64, seed: u64) -> Result<MaskCounts> {
    let g = GaussianSlots::new(model, n)?;
    let m = g.slots();
    Ok(count_masks(
        m,
        draws,
        seed,
        || (vec![0.0; m], vec![0.0; m]),
        |rng, (z, q)| {
            g.draw(rng, z, q);
            orthant_mask(q, t)
        },
    ))
}

/// Graph distribution of the limiting ensemble at normalised range `t`.
///
/// Exact (product of Φ(t/√α)) when Σ is diagonal; otherwise Monte-Carlo with
/// `draws` samples. For `n > 7` only edge-count marginals and the entropy are
/// kept.
pub fn gaussian_limit_distribution(model: &CovarianceModel, n: usize, t: f64, draws: u64, seed: u64) -> Result<GraphDistribution> {
    check_nodes(n)?;
    let m = pair_count(n);
    if model.is_product_form() {
        let p = model.edge_probability(t);
        if n <= MAX_DENSE_NODES {
            return GraphDistribution::from_probs(n, Method::GaussianLimit, graphs::erdos_renyi_probs(n, p)?, None);
        }
        let hist = (0..=m)
            .map(|k| binomial(m as u64, k as u64) as f64 * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32))
            .collect();
        return GraphDistribution::from_edge_counts(n, Method::GaussianLimit, hist, m as f64 * binary_entropy(p), None);
    }
    if draws == 0 {
        return Err(Error::EmptyCounts);
    }
    let counts = gaussian_limit_counts(model, n, t, draws, seed)?;
    counts_to_distribution(n, Method::GaussianLimit, counts, draws)
}

pub(crate) fn counts_to_distribution(n: usize, method: Method, counts: MaskCounts, draws: u64) -> Result<GraphDistribution> {
    let m = pair_count(n);
    if n <= MAX_DENSE_NODES {
        let dense = counts.into_dense(m);
        let est = estimate_entropy(&dense, draws)?;
        let probs = dense.iter().map(|c| *c as f64 / draws as f64).collect();
        let mut dist = GraphDistribution::from_probs(n, method, probs, Some(est.error_bars()))?;
        dist.entropy_bits = est.entropy_bits;
        Ok(dist)
    } else {
        let est = estimate_entropy_sparse(counts.nonzero().map(|(_, c)| c), draws, m)?;
        let hist = counts
            .edge_histogram(m)
            .into_iter()
            .map(|c| c as f64 / draws as f64)
            .collect();
        GraphDistribution::from_edge_counts(n, method, hist, est.entropy_bits, Some(est.error_bars()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitCurvePoint {
    pub t: f64,
    pub entropy_bits: f64,
    pub p_bar: f64,
    /// Monte-Carlo standard error of the entropy (0 when exact).
    pub standard_error: f64,
}

/// Limiting entropy over a grid of `t`. Every grid point reuses the same
/// Gaussian draws, so the curve is smooth in `t`.
pub fn limit_entropy_curve(model: &CovarianceModel, n: usize, ts: &[f64], draws: u64, seed: u64) -> Result<Vec<LimitCurvePoint>> {
    ts.iter()
        .map(|&t| {
            let dist = gaussian_limit_distribution(model, n, t, draws, seed)?;
            Ok(LimitCurvePoint {
                t,
                entropy_bits: dist.entropy_bits,
                p_bar: dist.mean_edge_density(),
                standard_error: dist.error.map_or(0.0, |e| e.standard),
            })
        })
        .collect()
}

/// Limiting per-edge probability when `r0(d) = sqrt(k d)`: `p(√(μ/k))`.
///
/// For a hard connection this is 1 for `k > μ`, 0 for `k < μ` and ½ at `k = μ`.
pub fn soft_limit_probability(connection: &ConnectionModel, k_scale: f64, model: &CovarianceModel) -> Result<f64> {
    if !(k_scale > 0.0) {
        return Err(Error::Domain {
            value: k_scale,
            domain: "k > 0",
        });
    }
    let ratio = (model.mu / k_scale).sqrt();
    Ok(match *connection {
        ConnectionModel::Hard { .. } => {
            if k_scale > model.mu {
                1.0
            } else if k_scale < model.mu {
                0.0
            } else {
                0.5
            }
        }
        ConnectionModel::Rayleigh { eta, .. } => (-ratio.powf(eta)).exp(),
    })
}

/// The scale `k` at which the limiting Rayleigh ensemble is G(n, ½).
pub fn k_for_half(eta: f64, model: &CovarianceModel) -> f64 {
    model.mu / std::f64::consts::LN_2.powf(2.0 / eta)
}
