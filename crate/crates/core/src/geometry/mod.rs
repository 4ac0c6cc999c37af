//! Points on the unit cube and unit torus, coordinate laws, and metrics.

mod distribution;
pub(crate) mod pchip;

pub use distribution::{CoordinateDistribution, CoordinateLaw, CDF_TABLE_POINTS};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Cube,
    Torus,
}

impl std::fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GeometryKind::Cube => "cube",
            GeometryKind::Torus => "torus",
        })
    }
}

/// The ambient space: [0,1]^d with the Euclidean metric, or the flat torus T^d.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub dimension: usize,
}

impl Geometry {
    pub fn new(kind: GeometryKind, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        Ok(Geometry { kind, dimension })
    }

    pub fn cube(dimension: usize) -> Self {
        Geometry {
            kind: GeometryKind::Cube,
            dimension,
        }
    }

    pub fn torus(dimension: usize) -> Self {
        Geometry {
            kind: GeometryKind::Torus,
            dimension,
        }
    }

    /// Largest possible distance between two points.
    pub fn diameter(&self) -> f64 {
        let root = (self.dimension as f64).sqrt();
        match self.kind {
            GeometryKind::Cube => root,
            GeometryKind::Torus => 0.5 * root,
        }
    }

    /// Distance between two points.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        for p in [a, b] {
            if p.dimension() != self.dimension {
                return Err(Error::DimensionMismatch {
                    expected: self.dimension,
                    got: p.dimension(),
                });
            }
        }
        Ok(squared_distance(self.kind, a.coords(), b.coords()).sqrt())
    }

    /// Draws a point with i.i.d. coordinates from `law`.
    pub fn sample_point<R: Rng + ?Sized>(&self, law: &CoordinateLaw, rng: &mut R) -> Point {
        Point((0..self.dimension).map(|_| law.sample(rng)).collect())
    }
}

/// A point of [0,1]^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidSpec("a point needs at least one coordinate".into()));
        }
        if let Some(&bad) = coords.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::Domain {
                value: bad,
                domain: "[0, 1]",
            });
        }
        Ok(Point(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }
}

/// Per-coordinate torus distance min(|x − y|, 1 − |x − y|).
pub fn torus_coordinate_distance(x: f64, y: f64) -> Result<f64> {
    for v in [x, y] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::Domain {
                value: v,
                domain: "[0, 1]",
            });
        }
    }
    Ok(wrap(x - y))
}

#[inline]
pub(crate) fn wrap(diff: f64) -> f64 {
    let a = diff.abs();
    a.min(1.0 - a)
}

/// Squared distance between coordinate slices of equal length. Unchecked.
#[inline]
pub fn squared_distance(kind: GeometryKind, a: &[f64], b: &[f64]) -> f64 {
    match kind {
        GeometryKind::Cube => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
        GeometryKind::Torus => a
            .iter()
            .zip(b)
            .map(|(x, y)| {
                let w = wrap(x - y);
                w * w
            })
            .sum(),
    }
}
