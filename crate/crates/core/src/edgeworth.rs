//! Third-order Edgeworth correction to the Gaussian limit at finite `d`.
//!
//! The density of the slot vector `q` is approximated by
//! `N(0, Σ)(q) · (1 + (1/(6√d)) Σ_{a,b,c} κ_abc H_abc(q))`, the sum running
//! over ordered slot triples. `κ_abc = E[g_a g_b g_c]` is the per-coordinate
//! third moment of the centred squared distances, and
//! `H_abc = z_a z_b z_c − z_a P_bc − z_b P_ac − z_c P_ab` with `P = Σ⁻¹`,
//! `z = P q` is the Hermite polynomial of the defining identity
//! `−∂_a ∂_b ∂_c N(0, Σ) = H_abc N(0, Σ)`.
//!
//! By exchangeability `κ` takes one of eight values depending on how the three
//! pairs overlap; see [`TripleConfig`].

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CoordinateDistribution, GeometryKind};
use crate::graphs::{check_dense, slot_pairs, GraphDistribution, Method};
use crate::limit::{coord_sq, covariance_model, kinks, CovarianceModel, GaussianSlots, PairMoments};
use crate::quadrature::Quadrature;
use crate::rng::fold_blocks_ordered;

/// Third moments of centred squared coordinate distances, by overlap pattern.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThirdMoments {
    /// `(ij, ij, ij)`
    pub e1: f64,
    /// `(ij, ij, ik)`
    pub e2: f64,
    /// `(ij, jk, ki)`
    pub e3: f64,
    /// `(ij, ik, il)`
    pub e4: f64,
    /// `(ij, kl, mn)`
    pub e5: f64,
    /// `(ij, ij, kl)`
    pub e6: f64,
    /// `(ij, jk, lm)`
    pub e7: f64,
    /// `(ij, jk, kl)`
    pub e8: f64,
}

/// Overlap pattern of a slot triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TripleConfig {
    Triple,
    TwoOne,
    Triangle,
    Star,
    Disjoint,
    DisjointDouble,
    WedgeDisjoint,
    Path,
}

impl TripleConfig {
    /// Classifies three edge slots of the `n`-node slot order.
    pub fn classify(n: usize, slots: [usize; 3]) -> Self {
        let pairs = slot_pairs(n);
        let [a, b, c] = slots.map(|s| pairs[s]);
        let shares = |x: (usize, usize), y: (usize, usize)| x.0 == y.0 || x.0 == y.1 || x.1 == y.0 || x.1 == y.1;
        if a == b && b == c {
            return TripleConfig::Triple;
        }
        if a == b || b == c || a == c {
            let (twice, once) = if a == b {
                (a, c)
            } else if b == c {
                (b, a)
            } else {
                (a, b)
            };
            return if shares(twice, once) {
                TripleConfig::TwoOne
            } else {
                TripleConfig::DisjointDouble
            };
        }
        let mut nodes = vec![a.0, a.1, b.0, b.1, c.0, c.1];
        nodes.sort_unstable();
        nodes.dedup();
        match nodes.len() {
            3 => TripleConfig::Triangle,
            4 => {
                let common = nodes.iter().any(|v| [a, b, c].iter().all(|p| p.0 == *v || p.1 == *v));
                if common {
                    TripleConfig::Star
                } else {
                    TripleConfig::Path
                }
            }
            5 => TripleConfig::WedgeDisjoint,
            _ => TripleConfig::Disjoint,
        }
    }
}

impl ThirdMoments {
    pub fn get(&self, config: TripleConfig) -> f64 {
        match config {
            TripleConfig::Triple => self.e1,
            TripleConfig::TwoOne => self.e2,
            TripleConfig::Triangle => self.e3,
            TripleConfig::Star => self.e4,
            TripleConfig::Disjoint => self.e5,
            TripleConfig::DisjointDouble => self.e6,
            TripleConfig::WedgeDisjoint => self.e7,
            TripleConfig::Path => self.e8,
        }
    }
}

fn cache() -> &'static Mutex<HashMap<(GeometryKind, String), ThirdMoments>> {
    static CACHE: OnceLock<Mutex<HashMap<(GeometryKind, String), ThirdMoments>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Third moments for i.i.d. coordinates with law `dist`; cached per
/// `(geometry, distribution)`.
///
/// Each moment is reduced by independence to nested one-dimensional integrals:
/// with `g(x, y)` the centred squared coordinate distance and
/// `F(x) = E_Y g(x, Y)`,
/// `e1 = E g³`, `e2 = E[E_Y[g(X,Y)²] F(X)]`,
/// `e3 = E[g(X,Y) E_Z[g(Y,Z) g(Z,X)]]`, `e4 = E F³`,
/// `e8 = E[F(Y) g(Y,Z) F(Z)]`. `e5`, `e6`, `e7` contain a pair independent
/// of the other two and vanish identically.
pub fn third_moments(kind: GeometryKind, dist: &CoordinateDistribution) -> Result<ThirdMoments> {
    let key = (kind, serde_json::to_string(dist).expect("distributions serialise"));
    if let Some(hit) = cache().lock().expect("cache lock").get(&key) {
        return Ok(*hit);
    }
    let value = compute_third_moments(kind, dist)?;
    cache().lock().expect("cache lock").insert(key, value);
    Ok(value)
}

fn compute_third_moments(kind: GeometryKind, dist: &CoordinateDistribution) -> Result<ThirdMoments> {
    let law = dist.prepare()?;
    let pm = PairMoments::new(kind, &law)?;
    let mid = Quadrature {
        abs_tol: 1e-13,
        rel_tol: 1e-12,
        max_intervals: 4000,
    };
    let outer = Quadrature {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_intervals: 4000,
    };
    let half = [0.5];

    let e1 = law.expect(&outer, |x| pm.over_y(x, |g, _| Ok(g * g * g)), &half)?;
    let e2 = law.expect(
        &outer,
        |x| {
            let a2 = pm.over_y(x, |g, _| Ok(g * g))?;
            Ok(a2 * pm.f(x)?)
        },
        &half,
    )?;
    let e3 = law.expect(
        &outer,
        |x| {
            law.expect(
                &mid,
                |y| {
                    let gxy = coord_sq(kind, x, y) - pm.mu;
                    let mut br = kinks(kind, x);
                    br.extend(kinks(kind, y));
                    let inner = law.expect(
                        pm.quad(),
                        |z| Ok((coord_sq(kind, y, z) - pm.mu) * (coord_sq(kind, z, x) - pm.mu)),
                        &br,
                    )?;
                    Ok(gxy * inner)
                },
                &kinks(kind, x),
            )
        },
        &half,
    )?;
    let e4 = law.expect(
        &outer,
        |x| {
            let f = pm.f(x)?;
            Ok(f * f * f)
        },
        &half,
    )?;
    let e8 = law.expect(
        &outer,
        |y| {
            let fy = pm.f(y)?;
            if fy == 0.0 {
                return Ok(0.0);
            }
            let inner = law.expect(&mid, |z| Ok((coord_sq(kind, y, z) - pm.mu) * pm.f(z)?), &kinks(kind, y))?;
            Ok(fy * inner)
        },
        &half,
    )?;
    Ok(ThirdMoments {
        e1,
        e2,
        e3,
        e4,
        e5: 0.0,
        e6: 0.0,
        e7: 0.0,
        e8,
    })
}

/// Gaussian limit plus skewness data for `n` nodes.
#[derive(Debug, Clone)]
pub struct EdgeworthModel {
    pub base: CovarianceModel,
    pub moments: ThirdMoments,
    pub n: usize,
    /// Σ⁻¹.
    pub precision_inverse: DMatrix<f64>,
    slots: GaussianSlots,
    /// `(a, b, c, multiplicity · κ_abc)` over `a ≤ b ≤ c` with κ ≠ 0.
    cubic: Vec<(usize, usize, usize, f64)>,
    /// `v_a = Σ_bc κ_abc P_bc`.
    linear: Vec<f64>,
}

impl EdgeworthModel {
    /// `base` must carry third moments (see [`CovarianceModel::with_third_moments`]).
    pub fn new(base: CovarianceModel, n: usize) -> Result<Self> {
        check_dense(n)?;
        let moments = base
            .third_moments
            .ok_or_else(|| Error::InvalidSpec("covariance model has no third moments attached".into()))?;
        let sigma = base.matrix(n);
        let m = sigma.nrows();
        let slots = GaussianSlots::new(&base, n)?;
        let precision_inverse = sigma
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite(format!("n = {n}")))?
            .inverse();
        let kappa = |a: usize, b: usize, c: usize| moments.get(TripleConfig::classify(n, [a, b, c]));
        let mut cubic = Vec::new();
        for a in 0..m {
            for b in a..m {
                for c in b..m {
                    let k = kappa(a, b, c);
                    if k != 0.0 {
                        let mult = if a == b && b == c {
                            1.0
                        } else if a == b || b == c {
                            3.0
                        } else {
                            6.0
                        };
                        cubic.push((a, b, c, mult * k));
                    }
                }
            }
        }
        let linear = (0..m)
            .map(|a| {
                let mut v = 0.0;
                for b in 0..m {
                    for c in 0..m {
                        v += kappa(a, b, c) * precision_inverse[(b, c)];
                    }
                }
                v
            })
            .collect();
        Ok(EdgeworthModel {
            base,
            moments,
            n,
            precision_inverse,
            slots,
            cubic,
            linear,
        })
    }

    /// Model for i.i.d. coordinates with law `dist`.
    pub fn for_distribution(kind: GeometryKind, dist: &CoordinateDistribution, n: usize) -> Result<Self> {
        Self::new(covariance_model(kind, dist)?.with_third_moments(dist)?, n)
    }

    pub fn slot_count(&self) -> usize {
        self.linear.len()
    }

    fn whiten(&self, q: &[f64], z: &mut [f64]) {
        let m = self.slot_count();
        for (a, za) in z.iter_mut().enumerate() {
            *za = (0..m).map(|b| self.precision_inverse[(a, b)] * q[b]).sum();
        }
    }

    /// `Σ_{a,b,c} κ_abc H_abc(q)` given `z = Σ⁻¹ q`.
    #[inline]
    fn correction_from_z(&self, z: &[f64]) -> f64 {
        let cubic: f64 = self.cubic.iter().map(|&(a, b, c, w)| w * z[a] * z[b] * z[c]).sum();
        let lin: f64 = z.iter().zip(&self.linear).map(|(a, b)| a * b).sum();
        cubic - 3.0 * lin
    }

    /// `Σ_{a,b,c} κ_abc H_abc(q)` over ordered slot triples.
    pub fn correction(&self, q: &[f64]) -> Result<f64> {
        self.check_len(q)?;
        let mut z = vec![0.0; self.slot_count()];
        self.whiten(q, &mut z);
        Ok(self.correction_from_z(&z))
    }

    fn check_len(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.slot_count() {
            return Err(Error::DimensionMismatch {
                expected: self.slot_count(),
                got: q.len(),
            });
        }
        Ok(())
    }
}

/// Which Hermite polynomial is requested; fixes the overlap pattern of `slots`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HermiteConfig {
    /// `(ij, ij, ij)`
    H1,
    /// `(ij, ij, ik)`
    H2,
    /// `(ij, jk, ki)`
    H3,
    /// `(ij, ik, il)`
    H4,
}

impl HermiteConfig {
    fn pattern(self) -> TripleConfig {
        match self {
            HermiteConfig::H1 => TripleConfig::Triple,
            HermiteConfig::H2 => TripleConfig::TwoOne,
            HermiteConfig::H3 => TripleConfig::Triangle,
            HermiteConfig::H4 => TripleConfig::Star,
        }
    }
}

/// `H_abc(q) = z_a z_b z_c − z_a P_bc − z_b P_ac − z_c P_ab`, `z = Σ⁻¹ q`.
pub fn hermite_value(model: &EdgeworthModel, config: HermiteConfig, q: &[f64], slots: [usize; 3]) -> Result<f64> {
    model.check_len(q)?;
    let m = model.slot_count();
    if slots.iter().any(|s| *s >= m) {
        return Err(Error::InvalidSpec(format!("slot index out of range 0..{m}")));
    }
    let found = TripleConfig::classify(model.n, slots);
    if found != config.pattern() {
        return Err(Error::InvalidSpec(format!("slots {slots:?} form {found:?}, not {config:?}")));
    }
    Ok(hermite_general(model, q, slots))
}

/// [`hermite_value`] without the pattern check.
pub fn hermite_general(model: &EdgeworthModel, q: &[f64], [a, b, c]: [usize; 3]) -> f64 {
    let mut z = vec![0.0; model.slot_count()];
    model.whiten(q, &mut z);
    let p = &model.precision_inverse;
    z[a] * z[b] * z[c] - z[a] * p[(b, c)] - z[b] * p[(a, c)] - z[c] * p[(a, b)]
}

/// Edgeworth-corrected graph distribution at normalised range `t` and
/// dimension `d`, from `draws` Gaussian samples.
///
/// Each draw lands in exactly one graph region and contributes the weight
/// `1 + correction/(6√d)`. Negative totals are clamped to 0 and the result is
/// renormalised; `raw_total` holds the pre-normalisation mass and
/// `clamped_mass` the removed negative mass.
pub fn edgeworth_distribution(model: &EdgeworthModel, t: f64, d: usize, draws: u64, seed: u64) -> Result<GraphDistribution> {
    if d == 0 {
        return Err(Error::InvalidSpec("dimension must be at least 1".into()));
    }
    if draws == 0 {
        return Err(Error::EmptyCounts);
    }
    let m = model.slot_count();
    let size = 1usize << m;
    let scale = 1.0 / (6.0 * (d as f64).sqrt());
    let chunk = ((1usize << 24) / size).max(1);
    let sums = fold_blocks_ordered(
        seed,
        draws,
        chunk,
        vec![0.0f64; size],
        |rng, count| {
            let mut acc = vec![0.0f64; size];
            let (mut zs, mut q, mut z) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
            for _ in 0..count {
                model.slots.draw(rng, &mut zs, &mut q);
                model.whiten(&q, &mut z);
                let w = 1.0 + scale * model.correction_from_z(&z);
                acc[crate::limit::orthant_mask(&q, t) as usize] += w;
            }
            acc
        },
        |acc, part| acc.iter_mut().zip(part).for_each(|(a, b)| *a += b),
    );
    let probs: Vec<f64> = sums.iter().map(|s| s / draws as f64).collect();
    let raw_total: f64 = probs.iter().sum();
    let mut dist = GraphDistribution::from_probs(model.n, Method::Edgeworth, probs, None)?;
    dist.raw_total = Some(raw_total);
    dist.clamped_mass.get_or_insert(0.0);
    Ok(dist)
}

/// One point of an entropy-versus-dimension curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionPoint {
    pub d: usize,
    pub entropy_bits: f64,
    pub clamped_mass: f64,
    pub raw_total: f64,
}

/// Least-squares fit of `H(d) = a − b (d^{-1/2} + c)`.
///
/// Only `a − b c` and `b` are identifiable from data, so `c` is fixed at 0 and
/// `a` is the `d → ∞` asymptote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub se_a: f64,
    pub se_b: f64,
    pub residual_rms: f64,
}

impl ScalingFit {
    pub fn predict(&self, d: f64) -> f64 {
        self.a - self.b * (d.powf(-0.5) + self.c)
    }
}

/// Fits `H = a − b d^{-1/2}` to `(d, H)` points.
pub fn fit_entropy_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|(d, _)| !(*d > 0.0)) {
        return Err(Error::Fit("dimensions must be positive".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(d, _)| d.powf(-0.5)).collect();
    let ys: Vec<f64> = points.iter().map(|(_, h)| *h).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return Err(Error::Fit("all dimensions coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let a = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - a - slope * x).powi(2)).sum();
    let s2 = rss / (n - 2.0);
    let sxx_raw: f64 = xs.iter().map(|x| x * x).sum();
    Ok(ScalingFit {
        a,
        b: -slope,
        c: 0.0,
        se_a: (s2 * sxx_raw / (n * sxx)).sqrt(),
        se_b: (s2 / sxx).sqrt(),
        residual_rms: (rss / n).sqrt(),
    })
}

/// Edgeworth entropy for each `d` in `ds` (all sharing the same Gaussian
/// draws) and the fitted `d^{-1/2}` scaling.
pub fn entropy_vs_dimension(
    kind: GeometryKind,
    dist: &CoordinateDistribution,
    n: usize,
    t: f64,
    ds: &[usize],
    draws: u64,
    seed: u64,
) -> Result<(Vec<DimensionPoint>, ScalingFit)> {
    if ds.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 dimensions, got {}", ds.len())));
    }
    let model = EdgeworthModel::for_distribution(kind, dist, n)?;
    let curve = ds
        .iter()
        .map(|&d| {
            let g = edgeworth_distribution(&model, t, d, draws, seed)?;
            Ok(DimensionPoint {
                d,
                entropy_bits: g.entropy_bits,
                clamped_mass: g.clamped_mass.unwrap_or(0.0),
                raw_total: g.raw_total.unwrap_or(1.0),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let fit = fit_entropy_scaling(&curve.iter().map(|p| (p.d as f64, p.entropy_bits)).collect::<Vec<_>>())?;
    Ok((curve, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn classification_covers_all_patterns() {
        // slots for n = 6: (0,1)=0 (0,2)=1 (0,3)=2 (1,2)=5 (2,3)=9 (3,4)=12 (4,5)=14
        let c = |s| TripleConfig::classify(6, s);
        assert_eq!(c([0, 0, 0]), TripleConfig::Triple);
        assert_eq!(c([0, 0, 1]), TripleConfig::TwoOne);
        assert_eq!(c([0, 1, 0]), TripleConfig::TwoOne);
        assert_eq!(c([0, 9, 0]), TripleConfig::DisjointDouble);
        assert_eq!(c([0, 1, 5]), TripleConfig::Triangle);
        assert_eq!(c([0, 1, 2]), TripleConfig::Star);
        assert_eq!(c([0, 5, 9]), TripleConfig::Path);
        assert_eq!(c([0, 5, 12]), TripleConfig::WedgeDisjoint);
        assert_eq!(c([0, 9, 14]), TripleConfig::Disjoint);
    }

    #[test]
    fn uniform_cube_moments() {
        let e = third_moments(GeometryKind::Cube, &CoordinateDistribution::Uniform).unwrap();
        assert_abs_diff_eq!(e.e1, 11.0 / 945.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.e2, 2.0 / 945.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.e3, -1.0 / 216.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.e4, 1.0 / 3780.0, epsilon = 1e-12);
        assert!(e.e8.abs() < 1e-12);
        assert_eq!((e.e5, e.e6, e.e7), (0.0, 0.0, 0.0));
    }

    #[test]
    fn uniform_torus_moments() {
        let e = third_moments(GeometryKind::Torus, &CoordinateDistribution::Uniform).unwrap();
        assert_abs_diff_eq!(e.e1, 1.0 / 3780.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e.e3, -31.0 / 120960.0, epsilon = 1e-12);
        assert!(e.e2.abs() < 1e-12 && e.e4.abs() < 1e-12 && e.e8.abs() < 1e-12);
    }

    #[test]
    fn hermite_diagonal_case() {
        let base = CovarianceModel {
            beta: 0.0,
            third_moments: Some(third_moments(GeometryKind::Torus, &CoordinateDistribution::Uniform).unwrap()),
            ..CovarianceModel::uniform(GeometryKind::Torus)
        };
        let model = EdgeworthModel::new(base, 3).unwrap();
        let alpha = 1.0 / 180.0;
        let q = [0.05, -0.02, 0.11];
        let h = hermite_value(&model, HermiteConfig::H1, &q, [1, 1, 1]).unwrap();
        let x = q[1] / alpha;
        assert!((h - (x * x * x - 3.0 * x / alpha)).abs() < 1e-9 * h.abs());
        let zero = [0.0; 3];
        assert_eq!(hermite_value(&model, HermiteConfig::H1, &zero, [0, 0, 0]).unwrap(), 0.0);
        assert_eq!(hermite_value(&model, HermiteConfig::H3, &zero, [0, 1, 2]).unwrap(), 0.0);
        assert!(hermite_value(&model, HermiteConfig::H3, &q, [0, 0, 1]).is_err());
        assert!(hermite_value(&model, HermiteConfig::H1, &q[..2], [0, 0, 0]).is_err());
    }

    #[test]
    fn correction_matches_explicit_triple_sum() {
        let model = EdgeworthModel::for_distribution(GeometryKind::Cube, &CoordinateDistribution::Uniform, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = model.slot_count();
        for _ in 0..5 {
            let q: Vec<f64> = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
            let mut direct = 0.0;
            for a in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        let k = model.moments.get(TripleConfig::classify(4, [a, b, c]));
                        direct += k * hermite_general(&model, &q, [a, b, c]);
                    }
                }
            }
            let fast = model.correction(&q).unwrap();
            assert!((fast - direct).abs() < 1e-10 * direct.abs().max(1.0), "{fast} vs {direct}");
        }
    }

    fn log_density_ratio(model: &EdgeworthModel, q: &[f64], x: &[f64]) -> f64 {
        let m = model.slot_count();
        let quad = |v: &[f64]| {
            let mut s = 0.0;
            for a in 0..m {
                for b in 0..m {
                    s += v[a] * model.precision_inverse[(a, b)] * v[b];
                }
            }
            s
        };
        -0.5 * (quad(x) - quad(q))
    }

    /// `−∂_a∂_b∂_c φ(q) / φ(q)` by a product of central differences, Richardson-extrapolated.
    fn fd_hermite(model: &EdgeworthModel, q: &[f64], [a, b, c]: [usize; 3], h: f64) -> f64 {
        let stencil = |h: f64| {
            let mut acc = 0.0;
            for sa in [-1.0, 1.0] {
                for sb in [-1.0, 1.0] {
                    for sc in [-1.0, 1.0] {
                        let mut x = q.to_vec();
                        x[a] += sa * h;
                        x[b] += sb * h;
                        x[c] += sc * h;
                        acc += sa * sb * sc * log_density_ratio(model, q, &x).exp();
                    }
                }
            }
            -acc / (8.0 * h * h * h)
        };
        (4.0 * stencil(h / 2.0) - stencil(h)) / 3.0
    }

    #[test]
    fn hermite_matches_finite_differences() {
        let model = EdgeworthModel::for_distribution(GeometryKind::Cube, &CoordinateDistribution::Uniform, 4).unwrap();
        let m = model.slot_count();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cases = [
            (HermiteConfig::H1, [2, 2, 2]),
            (HermiteConfig::H2, [0, 0, 1]),
            (HermiteConfig::H3, [0, 1, 3]),
            (HermiteConfig::H4, [0, 1, 2]),
        ];
        let scale = model.base.alpha.sqrt();
        for _ in 0..4 {
            let q: Vec<f64> = (0..m).map(|_| (2.0 * rng.random::<f64>() - 1.0) * 1.5 * scale).collect();
            for (config, slots) in cases {
                let exact = hermite_value(&model, config, &q, slots).unwrap();
                let fd = fd_hermite(&model, &q, slots, 2e-3 * scale);
                assert!((fd - exact).abs() <= 1e-4 * exact.abs(), "{config:?}: {fd} vs {exact}");
            }
        }
    }

    #[test]
    fn cube_triple_moment_by_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let k = 4_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..k {
            let g = (rng.random::<f64>() - rng.random::<f64>()).powi(2) - 1.0 / 6.0;
            s += g * g * g;
            s2 += g.powi(6);
        }
        let mean = s / k as f64;
        let se = ((s2 / k as f64 - mean * mean) / k as f64).sqrt();
        let e = third_moments(GeometryKind::Cube, &CoordinateDistribution::Uniform).unwrap();
        assert!((mean - e.e1).abs() < 4.0 * se);
    }

    #[test]
    fn precision_is_inverse() {
        let model = EdgeworthModel::for_distribution(GeometryKind::Cube, &CoordinateDistribution::Uniform, 5).unwrap();
        let prod = &model.precision_inverse * model.base.matrix(5);
        let eye = DMatrix::<f64>::identity(10, 10);
        assert!((prod - eye).abs().max() < 1e-10);
    }

    #[test]
    fn huge_dimension_recovers_gaussian_limit() {
        let model = EdgeworthModel::for_distribution(GeometryKind::Cube, &CoordinateDistribution::Uniform, 3).unwrap();
        let e = edgeworth_distribution(&model, 0.0, 1 << 40, 200_000, 5).unwrap();
        let g = crate::limit::gaussian_limit_distribution(&model.base, 3, 0.0, 200_000, 5).unwrap();
        for (a, b) in e.probs.unwrap().iter().zip(g.probs.unwrap()) {
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn correction_mass_is_near_zero() {
        let model = EdgeworthModel::for_distribution(GeometryKind::Cube, &CoordinateDistribution::Uniform, 4).unwrap();
        let e = edgeworth_distribution(&model, 0.0, 15, 400_000, 8).unwrap();
        assert!((e.raw_total.unwrap() - 1.0).abs() < 0.01);
        assert!(edgeworth_distribution(&model, 0.0, 0, 10, 8).is_err());
    }

    #[test]
    fn scaling_fit() {
        let pts: Vec<(f64, f64)> = [15.0, 30.0, 60.0, 120.0, 250.0]
            .iter()
            .map(|&d: &f64| (d, 5.9 - 0.4 * d.powf(-0.5)))
            .collect();
        let f = fit_entropy_scaling(&pts).unwrap();
        assert_abs_diff_eq!(f.a, 5.9, epsilon = 1e-12);
        assert_abs_diff_eq!(f.b, 0.4, epsilon = 1e-12);
        let flat: Vec<(f64, f64)> = [15.0, 30.0, 60.0].iter().map(|&d| (d, 3.0)).collect();
        let f = fit_entropy_scaling(&flat).unwrap();
        assert!(f.b.abs() < 1e-12);
        assert!(fit_entropy_scaling(&flat[..2]).is_err());
    }
}
