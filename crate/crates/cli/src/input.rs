//! Spec files, distributions and numeric grids from the command line.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use rgg_entropy::geometry::CoordinateDistribution;
use rgg_entropy::sampling::EnsembleSpec;

/// Reads an [`EnsembleSpec`] from JSON or TOML, chosen by extension.
pub fn load_spec(path: &Path) -> Result<EnsembleSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: EnsembleSpec = match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| rgg_entropy::Error::InvalidSpec(e.to_string()))?,
        Some("json") => serde_json::from_str(&text).map_err(|e| rgg_entropy::Error::InvalidSpec(e.to_string()))?,
        _ => match serde_json::from_str(&text) {
            Ok(s) => s,
            Err(_) => toml::from_str(&text).map_err(|e| rgg_entropy::Error::InvalidSpec(e.to_string()))?,
        },
    };
    spec.validate()?;
    Ok(spec)
}

/// Loads the spec and replaces its distribution with a tabulated density when given.
pub fn load_spec_with_density(path: &Path, density: Option<&PathBuf>) -> Result<EnsembleSpec> {
    let mut spec = load_spec(path)?;
    if let Some(csv) = density {
        spec.distribution = CoordinateDistribution::from_csv_path(csv)?;
        spec.validate()?;
    }
    Ok(spec)
}

/// `uniform`, `truncated-gaussian`, `inverted-gaussian` or `bernoulli:<p>`;
/// `density` overrides with a tabulated CSV.
pub fn parse_distribution(name: &str, density: Option<&PathBuf>) -> Result<CoordinateDistribution> {
    if let Some(csv) = density {
        return Ok(CoordinateDistribution::from_csv_path(csv)?);
    }
    let dist = match name {
        "uniform" => CoordinateDistribution::Uniform,
        "truncated-gaussian" => CoordinateDistribution::TruncatedGaussian,
        "inverted-gaussian" => CoordinateDistribution::InvertedGaussian,
        other => match other.strip_prefix("bernoulli:") {
            Some(p) => CoordinateDistribution::Bernoulli {
                p: p.parse().map_err(|_| rgg_entropy::Error::InvalidSpec(format!("bad Bernoulli parameter {p:?}")))?,
            },
            None => return Err(rgg_entropy::Error::InvalidSpec(format!("unknown distribution {other:?}")).into()),
        },
    };
    dist.validate()?;
    Ok(dist)
}

/// `start:stop:count` (inclusive, evenly spaced) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let bad = || rgg_entropy::Error::InvalidSpec(format!("bad grid {text:?}"));
    if let [a, b, n] = text.split(':').collect::<Vec<_>>()[..] {
        let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        let n: usize = n.parse().map_err(|_| bad())?;
        return Ok(match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
        });
    }
    let values = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if values.iter().any(|v| !v.is_finite()) {
        bail!(bad());
    }
    Ok(values)
}

/// Comma-separated positive integers.
pub fn parse_dims(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .ok()
                .filter(|d| *d > 0)
                .ok_or_else(|| rgg_entropy::Error::InvalidSpec(format!("bad dimension {s:?}")).into())
        })
        .collect()
}
