//! Closed-form ensembles: three nodes, hard connection, on the unit circle
//! (one-dimensional torus) or the unit interval.
//!
//! `p_k` is the probability of one specific labelled graph with `k` edges;
//! there are 1, 3, 3, 1 such graphs for `k = 0, 1, 2, 3`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::{GraphDistribution, Method};
use crate::special::plogp_bits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExactGeometry {
    #[serde(rename = "torus")]
    Torus1D,
    #[serde(rename = "line")]
    Line1D,
}

impl ExactGeometry {
    /// Largest meaningful r0; beyond it the graph is always complete.
    pub fn diameter(&self) -> f64 {
        match self {
            ExactGeometry::Torus1D => 0.5,
            ExactGeometry::Line1D => 1.0,
        }
    }

    /// Radius at which the piecewise formulas switch branch.
    pub fn branch_point(&self) -> f64 {
        match self {
            ExactGeometry::Torus1D => 1.0 / 3.0,
            ExactGeometry::Line1D => 0.5,
        }
    }
}

impl std::str::FromStr for ExactGeometry {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "torus" | "torus1d" => Ok(ExactGeometry::Torus1D),
            "line" | "line1d" => Ok(ExactGeometry::Line1D),
            other => Err(Error::InvalidSpec(format!(
                "exact formulas exist only for `torus` and `line`, not `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactPieces {
    pub geometry: ExactGeometry,
    pub r0: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl ExactPieces {
    /// Entropy in bits.
    pub fn entropy(&self) -> f64 {
        plogp_bits(self.p0) + 3.0 * plogp_bits(self.p1) + 3.0 * plogp_bits(self.p2) + plogp_bits(self.p3)
    }

    /// Average connection probability p̄ = p1 + 2 p2 + p3.
    pub fn p_bar(&self) -> f64 {
        self.p1 + 2.0 * self.p2 + self.p3
    }

    /// `p0 + 3 p1 + 3 p2 + p3`; equals 1.
    pub fn total(&self) -> f64 {
        self.p0 + 3.0 * (self.p1 + self.p2) + self.p3
    }

    /// Probability of the graph with edge mask `mask`.
    pub fn prob_of_mask(&self, mask: u64) -> f64 {
        [self.p0, self.p1, self.p2, self.p3][mask.count_ones() as usize]
    }

    pub fn to_distribution(&self) -> Result<GraphDistribution> {
        let probs = (0..8u64).map(|m| self.prob_of_mask(m)).collect();
        GraphDistribution::from_probs(3, Method::Exact, probs, None)
    }
}

/// Per-graph probabilities at connection range `r0`.
///
/// Radii above the diameter behave like the diameter (complete graph).
pub fn exact_probabilities(geometry: ExactGeometry, r0: f64) -> Result<ExactPieces> {
    if !(r0 >= 0.0) {
        return Err(Error::Domain {
            value: r0,
            domain: "r0 ≥ 0",
        });
    }
    let r = r0.min(geometry.diameter());
    let (p0, p1, p2, p3) = match geometry {
        ExactGeometry::Torus1D if r < 1.0 / 3.0 => {
            let q = 1.0 - 3.0 * r;
            (q * q, r * (2.0 - 5.0 * r), r * r, 3.0 * r * r)
        }
        ExactGeometry::Torus1D => {
            let q = 2.0 * r - 1.0;
            (0.0, q * q, (-8.0 * r + 6.0) * r - 1.0, (12.0 * r - 6.0) * r + 1.0)
        }
        ExactGeometry::Line1D if r < 0.5 => {
            let q = 1.0 - 2.0 * r;
            (
                q * q * q,
                ((14.0 / 3.0 * r - 6.0) * r + 2.0) * r,
                (1.0 - 4.0 / 3.0 * r) * r * r,
                (3.0 - 2.0 * r) * r * r,
            )
        }
        ExactGeometry::Line1D => {
            let s = 1.0 - r;
            let t = 3.0 * r - 1.0;
            (
                0.0,
                2.0 / 3.0 * s * s * s,
                4.0 / 3.0 * r * r * r - t * t / 3.0,
                (3.0 - 2.0 * r) * r * r,
            )
        }
    };
    Ok(ExactPieces {
        geometry,
        r0,
        p0: p0.max(0.0),
        p1: p1.max(0.0),
        p2: p2.max(0.0),
        p3: p3.max(0.0),
    })
}

/// Ensemble entropy in bits at `r0`.
pub fn exact_entropy(geometry: ExactGeometry, r0: f64) -> Result<f64> {
    Ok(exact_probabilities(geometry, r0)?.entropy())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactMaximum {
    pub r0_hat: f64,
    pub entropy_max: f64,
    pub p_bar_max: f64,
}

/// The entropy-maximising radius. Exact (1/4) on the torus; golden-section
/// search to 1e-8 on the line.
pub fn exact_maximizer(geometry: ExactGeometry) -> ExactMaximum {
    let r0_hat = match geometry {
        ExactGeometry::Torus1D => 0.25,
        ExactGeometry::Line1D => golden_section_max(
            |r| exact_entropy(geometry, r).expect("grid stays in domain"),
            0.2,
            0.4,
            1e-8,
        ),
    };
    let p = exact_probabilities(geometry, r0_hat).expect("r0_hat is in domain");
    ExactMaximum {
        r0_hat,
        entropy_max: p.entropy(),
        p_bar_max: p.p_bar(),
    }
}

/// Maximiser of a unimodal function on `[a, b]`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// One row of an exact curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    pub r0: f64,
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub entropy_bits: f64,
    pub p_bar: f64,
}

pub fn exact_curve(geometry: ExactGeometry, grid: &[f64]) -> Result<Vec<ExactRow>> {
    grid.iter()
        .map(|&r0| {
            let p = exact_probabilities(geometry, r0)?;
            Ok(ExactRow {
                r0,
                p0: p.p0,
                p1: p.p1,
                p2: p.p2,
                p3: p.p3,
                entropy_bits: p.entropy(),
                p_bar: p.p_bar(),
            })
        })
        .collect()
}
