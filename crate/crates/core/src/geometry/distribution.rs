//! Coordinate laws π on [0, 1]; node positions are products of i.i.d. draws.

use std::io::Read;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pchip::Pchip;
use crate::error::{Error, Result};
use crate::quadrature::Quadrature;

/// Grid size of inverse-CDF tables.
pub const CDF_TABLE_POINTS: usize = 4097;

/// Knot count up to which tabulated densities pass their knots to the
/// quadrature as breakpoints.
const MAX_KNOT_BREAKS: usize = 64;

/// The law of a single coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoordinateDistribution {
    Uniform,
    /// Gaussian centred at 1/2, density ∝ exp(−(x − ½)²) restricted to [0, 1].
    TruncatedGaussian,
    /// Density ∝ exp(+(x − ½)²) on [0, 1].
    InvertedGaussian,
    /// Coordinate is 1 with probability `p`, otherwise 0.
    Bernoulli { p: f64 },
    /// Piecewise-linear density through `(x, density)` samples; zero outside
    /// `[x₀, x_last]`. Normalised on construction.
    Tabulated { x: Vec<f64>, density: Vec<f64> },
}

impl CoordinateDistribution {
    pub fn validate(&self) -> Result<()> {
        match self {
            CoordinateDistribution::Bernoulli { p } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidSpec(format!("Bernoulli p = {p} outside [0, 1]")));
                }
            }
            CoordinateDistribution::Tabulated { x, density } => {
                if x.len() != density.len() || x.len() < 2 {
                    return Err(Error::InvalidSpec(
                        "tabulated density needs at least two (x, density) rows".into(),
                    ));
                }
                if x.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidSpec("tabulated x must be strictly increasing".into()));
                }
                if x[0] < 0.0 || x[x.len() - 1] > 1.0 {
                    return Err(Error::InvalidSpec("tabulated x must lie in [0, 1]".into()));
                }
                if density.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
                    return Err(Error::InvalidSpec("tabulated density must be finite and ≥ 0".into()));
                }
                if trapezoid(x, density) <= 0.0 {
                    return Err(Error::InvalidSpec("tabulated density has zero mass".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Builds the sampling/quadrature tables for this law.
    pub fn prepare(&self) -> Result<CoordinateLaw> {
        CoordinateLaw::new(self.clone())
    }

    /// Reads a two-column `x,density` CSV with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "density" {
            return Err(Error::InvalidSpec(format!(
                "expected header `x,density`, found `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut x = Vec::new();
        let mut density = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidSpec(format!("cannot parse `{s}` as a number")))
            };
            x.push(parse(&row[0])?);
            density.push(parse(&row[1])?);
        }
        let dist = CoordinateDistribution::Tabulated { x, density };
        dist.validate()?;
        Ok(dist)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file)
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

#[derive(Debug, Clone)]
enum Shape {
    Gaussian { sign: f64 },
    PiecewiseLinear { x: Vec<f64>, y: Vec<f64> },
}

impl Shape {
    fn eval(&self, t: f64) -> f64 {
        match self {
            Shape::Gaussian { sign } => {
                if (0.0..=1.0).contains(&t) {
                    (sign * (t - 0.5) * (t - 0.5)).exp()
                } else {
                    0.0
                }
            }
            Shape::PiecewiseLinear { x, y } => {
                let n = x.len();
                if t < x[0] || t > x[n - 1] {
                    return 0.0;
                }
                let i = (x.partition_point(|&v| v <= t)).clamp(1, n - 1) - 1;
                let s = (t - x[i]) / (x[i + 1] - x[i]);
                y[i] + s * (y[i + 1] - y[i])
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Uniform,
    TwoPoint { p: f64 },
    Continuous {
        shape: Shape,
        norm: f64,
        support: (f64, f64),
        breaks: Vec<f64>,
        inverse_cdf: Pchip,
    },
}

/// A [`CoordinateDistribution`] with its normalising constant and inverse-CDF
/// table precomputed. Immutable and cheap to share across threads.
#[derive(Debug, Clone)]
pub struct CoordinateLaw {
    dist: CoordinateDistribution,
    kind: Kind,
}

impl CoordinateLaw {
    pub fn new(dist: CoordinateDistribution) -> Result<Self> {
        dist.validate()?;
        let kind = match &dist {
            CoordinateDistribution::Uniform => Kind::Uniform,
            CoordinateDistribution::Bernoulli { p } => Kind::TwoPoint { p: *p },
            CoordinateDistribution::TruncatedGaussian => continuous(Shape::Gaussian { sign: -1.0 }, (0.0, 1.0), vec![])?,
            CoordinateDistribution::InvertedGaussian => continuous(Shape::Gaussian { sign: 1.0 }, (0.0, 1.0), vec![])?,
            CoordinateDistribution::Tabulated { x, density } => {
                let support = (x[0], x[x.len() - 1]);
                let breaks = if x.len() <= MAX_KNOT_BREAKS { x.clone() } else { vec![] };
                continuous(
                    Shape::PiecewiseLinear {
                        x: x.clone(),
                        y: density.clone(),
                    },
                    support,
                    breaks,
                )?
            }
        };
        Ok(CoordinateLaw { dist, kind })
    }

    pub fn distribution(&self) -> &CoordinateDistribution {
        &self.dist
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, Kind::Uniform)
    }

    /// Normalised density π(x), or `None` for the atomic (Bernoulli) law.
    pub fn density(&self, x: f64) -> Option<f64> {
        match &self.kind {
            Kind::Uniform => Some(if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }),
            Kind::TwoPoint { .. } => None,
            Kind::Continuous { shape, norm, .. } => Some(shape.eval(x) / norm),
        }
    }

    /// E[f(X)]. `breaks` marks known kinks of `f` for the quadrature.
    pub fn expect<F>(&self, quad: &Quadrature, mut f: F, breaks: &[f64]) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        match &self.kind {
            Kind::Uniform => quad.try_integrate(f, 0.0, 1.0, breaks),
            Kind::TwoPoint { p } => {
                let mut acc = 0.0;
                if *p < 1.0 {
                    acc += (1.0 - p) * f(0.0)?;
                }
                if *p > 0.0 {
                    acc += p * f(1.0)?;
                }
                Ok(acc)
            }
            Kind::Continuous {
                shape,
                norm,
                support,
                breaks: knots,
                ..
            } => {
                let all: Vec<f64>;
                let pts = if knots.is_empty() {
                    breaks
                } else {
                    all = breaks.iter().chain(knots.iter()).copied().collect();
                    &all
                };
                quad.try_integrate(
                    |x| {
                        let w = shape.eval(x);
                        if w == 0.0 {
                            Ok(0.0)
                        } else {
                            Ok(w * f(x)? / norm)
                        }
                    },
                    support.0,
                    support.1,
                    pts,
                )
            }
        }
    }

    pub fn mean(&self, quad: &Quadrature) -> Result<f64> {
        match self.kind {
            Kind::Uniform => Ok(0.5),
            Kind::TwoPoint { p } => Ok(p),
            _ => self.expect(quad, Ok, &[]),
        }
    }

    /// k-th central moment E[(X − E X)^k].
    pub fn central_moment(&self, quad: &Quadrature, k: i32) -> Result<f64> {
        match self.kind {
            Kind::TwoPoint { p } => Ok((1.0 - p) * (-p).powi(k) + p * (1.0 - p).powi(k)),
            _ => {
                let m = self.mean(quad)?;
                self.expect(quad, |x| Ok((x - m).powi(k)), &[])
            }
        }
    }

    /// Draws one coordinate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            Kind::Uniform => rng.random::<f64>(),
            Kind::TwoPoint { p } => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            Kind::Continuous { inverse_cdf, .. } => inverse_cdf.eval(rng.random::<f64>()),
        }
    }

    /// Inverse CDF used by [`CoordinateLaw::sample`].
    pub fn quantile(&self, u: f64) -> f64 {
        match &self.kind {
            Kind::Uniform => u.clamp(0.0, 1.0),
            Kind::TwoPoint { p } => {
                if u < 1.0 - p {
                    0.0
                } else {
                    1.0
                }
            }
            Kind::Continuous { inverse_cdf, .. } => inverse_cdf.eval(u),
        }
    }
}

fn continuous(shape: Shape, support: (f64, f64), breaks: Vec<f64>) -> Result<Kind> {
    let quad = Quadrature::default();
    let (lo, hi) = support;
    let step = (hi - lo) / (CDF_TABLE_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..CDF_TABLE_POINTS).map(|i| lo + step * i as f64).collect();
    let mut cdf = Vec::with_capacity(CDF_TABLE_POINTS);
    cdf.push(0.0);
    let mut acc = 0.0;
    for w in grid.windows(2) {
        acc += quad.try_integrate(|x| Ok(shape.eval(x)), w[0], w[1], &breaks)?;
        cdf.push(acc);
    }
    let norm = acc;
    // knots of u → x; flat CDF stretches (zero density) collapse onto their left end
    let mut us = Vec::with_capacity(CDF_TABLE_POINTS);
    let mut xs = Vec::with_capacity(CDF_TABLE_POINTS);
    for (x, c) in grid.iter().zip(&cdf) {
        let u = c / norm;
        if us.last().is_none_or(|&last| u > last) {
            us.push(u);
            xs.push(*x);
        }
    }
    if let Some(last) = us.last_mut() {
        *last = 1.0;
    }
    Ok(Kind::Continuous {
        shape,
        norm,
        support,
        breaks,
        inverse_cdf: Pchip::new(us, xs),
    })
}
