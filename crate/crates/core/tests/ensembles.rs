//! Cross-module consistency on small ensembles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rgg_entropy::exact_small::{exact_probabilities, ExactGeometry};
use rgg_entropy::geometry::{CoordinateDistribution, Geometry, GeometryKind};
use rgg_entropy::limit::{gaussian_limit_distribution, CovarianceModel};
use rgg_entropy::mc_entropy::sample_distribution;
use rgg_entropy::optimize::{optimize_r0, OptimizeConfig};
use rgg_entropy::rng::derive_seed;
use rgg_entropy::sampling::{average_connection_probability, sample_counts, ConnectionModel, EnsembleSpec};

fn hard(geometry: Geometry, n: usize, r0: f64) -> EnsembleSpec {
    EnsembleSpec::new(geometry, n, CoordinateDistribution::Uniform, ConnectionModel::Hard { r0 })
}

#[test]
fn sampled_frequencies_match_exact_pieces() {
    let l = 400_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (g, geometry) in [(ExactGeometry::Torus1D, Geometry::torus(1)), (ExactGeometry::Line1D, Geometry::cube(1))] {
        for i in 0..20 {
            let r0 = rng.random::<f64>() * g.diameter();
            let exact = exact_probabilities(g, r0).unwrap();
            let counts = sample_counts(&hard(geometry, 3, r0), l, derive_seed(11, i)).unwrap();
            for (mask, c) in counts.iter().enumerate() {
                let p = exact.prob_of_mask(mask as u64);
                let se = (p * (1.0 - p) / l as f64).sqrt();
                let freq = *c as f64 / l as f64;
                assert!((freq - p).abs() <= 4.0 * se + 1e-12, "{g:?} r0={r0} mask={mask}: {freq} vs {p}");
            }
        }
    }
}

#[test]
fn torus_pbar_at_maximiser_is_half() {
    let p = average_connection_probability(&hard(Geometry::torus(1), 3, 0.25), 0).unwrap();
    assert!(p.by_quadrature);
    assert!((p.value - 0.5).abs() < 1e-10);
}

#[test]
fn finite_dimension_approaches_limit() {
    let model = CovarianceModel::uniform(GeometryKind::Torus);
    let limit = gaussian_limit_distribution(&model, 3, 0.0, 1, 0).unwrap();
    let d = 200;
    let r0 = model.r0_for_t(0.0, d).unwrap();
    let (dist, est) = sample_distribution(&hard(Geometry::torus(d), 3, r0), 200_000, 5).unwrap();
    assert!((est.entropy_bits - limit.entropy_bits).abs() < 0.02);
    assert!((dist.mean_edge_density() - 0.5).abs() < 0.01);
}

#[test]
fn optimiser_finds_exact_line_maximum() {
    let cfg = OptimizeConfig {
        samples: 300_000,
        grid: 50,
        coarse_samples: 100_000,
    };
    let o = optimize_r0(&hard(Geometry::cube(1), 3, 0.1), cfg, 17).unwrap();
    assert!((o.r0_hat - 0.2833).abs() < 3.0 * o.se_r0.max(0.002), "{} ± {}", o.r0_hat, o.se_r0);
    assert!((o.p_bar_max - 0.486).abs() < 0.01);
    assert!(o.chi2_ratio > 0.3 && o.chi2_ratio < 3.0, "{}", o.chi2_ratio);
}
