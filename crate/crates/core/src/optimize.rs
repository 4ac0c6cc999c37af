//! Entropy-maximising connection range.
//!
//! A coarse scan over `[0, D]` locates the peak, a finer grid over the
//! bracket around it is fitted with a quadratic in standardised `x`, and the
//! delta method carries the fit covariance through to the maximiser and the
//! maximum.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mc_entropy::{entropy_curve, CurvePoint};
use crate::rng::derive_seed;
use crate::sampling::{average_connection_probability, EnsembleSpec};
use crate::special::pair_count;

/// Number of coarse steps across `[0, D]`.
pub const COARSE_STEPS: usize = 50;
/// Default number of refined grid points.
pub const DEFAULT_GRID: usize = 100;

/// Least-squares quadratic `ỹ = ã x̃² + b̃ x̃ + c̃` in `x̃ = (x − μ_x)/σ_x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFit {
    pub a_tilde: f64,
    pub b_tilde: f64,
    pub c_tilde: f64,
    pub mu_x: f64,
    pub sigma_x: f64,
    pub x_max: f64,
    pub y_max: f64,
    /// Delta-method variances using the residual variance `RSS/(N − 3)`.
    pub var_x_max: f64,
    pub var_y_max: f64,
    /// 2-norm condition number of the standardised normal matrix.
    pub condition_number: f64,
    pub rss: f64,
    pub points: usize,
    /// `(X̃ᵀX̃)⁻¹`, row-major.
    pub normal_inverse: [[f64; 3]; 3],
}

/// Coefficients of the fit in unscaled `x`: `y = a x² + b x + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QuadraticFit {
    pub fn raw_coefficients(&self) -> RawCoefficients {
        let (a, b, c, m, s) = (self.a_tilde, self.b_tilde, self.c_tilde, self.mu_x, self.sigma_x);
        RawCoefficients {
            a: a / (s * s),
            b: b / s - 2.0 * a * m / (s * s),
            c: a * m * m / (s * s) - b * m / s + c,
        }
    }

    pub fn predict(&self, x: f64) -> f64 {
        let z = (x - self.mu_x) / self.sigma_x;
        self.a_tilde * z * z + self.b_tilde * z + self.c_tilde
    }

    /// Gradients of `x_max` and `y_max` in `(ã, b̃, c̃)`.
    pub fn jacobians(&self) -> ([f64; 3], [f64; 3]) {
        let (a, b, s) = (self.a_tilde, self.b_tilde, self.sigma_x);
        (
            [s * b / (2.0 * a * a), -s / (2.0 * a), 0.0],
            [b * b / (4.0 * a * a), -b / (2.0 * a), 1.0],
        )
    }

    /// `(Var x_max, Var y_max)` for per-point noise variance `sigma2`.
    pub fn delta_variances(&self, sigma2: f64) -> (f64, f64) {
        let (jx, jy) = self.jacobians();
        let form = |j: [f64; 3]| {
            let mut s = 0.0;
            for (r, jr) in j.iter().enumerate() {
                for (c, jc) in j.iter().enumerate() {
                    s += jr * self.normal_inverse[r][c] * jc;
                }
            }
            s
        };
        (sigma2 * form(jx), sigma2 * form(jy))
    }
}

/// Fits a concave quadratic to `(x, y)` points.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    let n = points.len();
    if n < 3 {
        return Err(Error::Fit(format!("need at least 3 points, got {n}")));
    }
    let nf = n as f64;
    let mu_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let sigma_x = (points.iter().map(|p| (p.0 - mu_x).powi(2)).sum::<f64>() / nf).sqrt();
    if !(sigma_x > 0.0) || !sigma_x.is_finite() {
        return Err(Error::Fit("x values do not spread".into()));
    }
    let mut s = [0.0f64; 5];
    let mut t = [0.0f64; 3];
    for &(x, y) in points {
        let z = (x - mu_x) / sigma_x;
        let mut p = 1.0;
        for sk in s.iter_mut() {
            *sk += p;
            p *= z;
        }
        t[0] += z * z * y;
        t[1] += z * y;
        t[2] += y;
    }
    let normal = Matrix3::new(s[4], s[3], s[2], s[3], s[2], s[1], s[2], s[1], s[0]);
    let eig = normal.symmetric_eigenvalues();
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 0.0) || hi / lo > 1e12 {
        return Err(Error::Fit("singular normal matrix".into()));
    }
    let inv = normal.try_inverse().ok_or_else(|| Error::Fit("singular normal matrix".into()))?;
    let theta = inv * Vector3::new(t[0], t[1], t[2]);
    let (a, b, c) = (theta[0], theta[1], theta[2]);
    if !(a < 0.0) {
        return Err(Error::Fit(format!("fitted quadratic is not concave (ã = {a:e})")));
    }
    let rss: f64 = points
        .iter()
        .map(|&(x, y)| {
            let z = (x - mu_x) / sigma_x;
            (y - (a * z * z + b * z + c)).powi(2)
        })
        .sum();
    let mut normal_inverse = [[0.0; 3]; 3];
    for (r, row) in normal_inverse.iter_mut().enumerate() {
        for (col, v) in row.iter_mut().enumerate() {
            *v = inv[(r, col)];
        }
    }
    let mut fit = QuadraticFit {
        a_tilde: a,
        b_tilde: b,
        c_tilde: c,
        mu_x,
        sigma_x,
        x_max: mu_x - sigma_x * b / (2.0 * a),
        y_max: c - b * b / (4.0 * a),
        var_x_max: 0.0,
        var_y_max: 0.0,
        condition_number: hi / lo,
        rss,
        points: n,
        normal_inverse,
    };
    let residual_var = if n > 3 { rss / (nf - 3.0) } else { 0.0 };
    (fit.var_x_max, fit.var_y_max) = fit.delta_variances(residual_var);
    Ok(fit)
}

/// Crude bound on the noise variance of the fitted entropies,
/// `2^m (1 + m)² N / L` with `m = C(n, 2)`.
pub fn sigma2_bound(n: usize, l: u64, grid: usize) -> f64 {
    let m = pair_count(n) as f64;
    m.exp2() * (1.0 + m).powi(2) * grid as f64 / l as f64
}

/// Standard errors `(se_x_max, se_y_max)` from the noise bound.
pub fn delta_method_errors(fit: &QuadraticFit, n: usize, l: u64, grid: usize) -> (f64, f64) {
    let (vx, vy) = fit.delta_variances(sigma2_bound(n, l, grid));
    (vx.max(0.0).sqrt(), vy.max(0.0).sqrt())
}

/// Outcome of the coarse scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub argmax: f64,
    /// Set when the coarse maximum sits on an end of `[0, D]`.
    pub at_boundary: bool,
    pub scan: Vec<CurvePoint>,
}

/// Three coarse cells of width `h` centred on `centre`, clipped to `[0, D]`.
fn cells_around(centre: f64, h: f64, diameter: f64) -> (f64, f64) {
    let lo = (centre - 1.5 * h).max(0.0);
    let hi = (centre + 1.5 * h).min(diameter);
    if lo == 0.0 {
        (0.0, (3.0 * h).min(diameter))
    } else if hi == diameter {
        ((diameter - 3.0 * h).max(0.0), diameter)
    } else {
        (lo, hi)
    }
}

/// Scans `r0 = k D / 50`, `k = 0..=50`, at `l0` samples each and brackets the
/// maximum by the three coarse cells around it.
pub fn coarse_scan(template: &EnsembleSpec, l0: u64, seed: u64) -> Result<Bracket> {
    template.validate()?;
    let diameter = template.geometry.diameter();
    let h = diameter / COARSE_STEPS as f64;
    let grid: Vec<f64> = (0..=COARSE_STEPS).map(|k| k as f64 * h).collect();
    let scan = entropy_curve(template, &grid, l0, seed)?;
    let values: Vec<f64> = scan.iter().map(|p| p.estimate.corrected_bits()).collect();
    Ok(bracket_from_scan(&grid, &values, scan, diameter))
}

/// Brackets the maximum of `values` on the evenly spaced `grid` over `[0, D]`.
pub fn bracket_from_scan(grid: &[f64], values: &[f64], scan: Vec<CurvePoint>, diameter: f64) -> Bracket {
    let k = argmax(values.iter().copied());
    let h = diameter / (grid.len().max(2) - 1) as f64;
    let (lo, hi) = cells_around(grid[k], h, diameter);
    Bracket {
        lo,
        hi,
        argmax: grid[k],
        at_boundary: k == 0 || k + 1 == grid.len(),
        scan,
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Result of [`optimize_r0`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub r0_hat: f64,
    pub se_r0: f64,
    #[serde(rename = "H_max")]
    pub h_max: f64,
    #[serde(rename = "se_H")]
    pub se_h: f64,
    pub p_bar_max: f64,
    pub fit: RawCoefficients,
    pub condition_number: f64,
    pub quadratic: QuadraticFit,
    pub bracket: (f64, f64),
    pub rebracketed: bool,
    pub boundary_warning: bool,
    /// `RSS / Σσ_i²`, expected near 1 when the residuals are sampling noise.
    pub chi2_ratio: f64,
    pub grid: Vec<CurvePoint>,
}

/// Budget for [`optimize_r0`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    /// Samples per refined grid point.
    pub samples: u64,
    /// Refined grid size.
    pub grid: usize,
    /// Samples per coarse point.
    pub coarse_samples: u64,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            samples: 1_000_000,
            grid: DEFAULT_GRID,
            coarse_samples: 1_000_000,
        }
    }
}

/// Full search for the entropy-maximising `r0` of `template`.
///
/// If the fitted maximiser leaves the bracket, the bracket is recentred on it
/// once; a second escape is an error.
pub fn optimize_r0(template: &EnsembleSpec, config: OptimizeConfig, seed: u64) -> Result<Optimum> {
    if config.grid < 3 {
        return Err(Error::InvalidSpec(format!("grid size {} is below 3", config.grid)));
    }
    let bracket = coarse_scan(template, config.coarse_samples, derive_seed(seed, 0))?;
    let diameter = template.geometry.diameter();
    let h = diameter / COARSE_STEPS as f64;
    let (mut lo, mut hi) = (bracket.lo, bracket.hi);
    let mut rebracketed = false;
    let (fit, grid) = loop {
        let xs: Vec<f64> = (0..config.grid)
            .map(|i| lo + (hi - lo) * i as f64 / (config.grid - 1) as f64)
            .collect();
        let pass = 1 + rebracketed as u64;
        let grid = entropy_curve(template, &xs, config.samples, derive_seed(seed, pass))?;
        let pts: Vec<(f64, f64)> = grid.iter().map(|p| (p.r0, p.estimate.corrected_bits())).collect();
        let fit = fit_quadratic(&pts)?;
        if fit.x_max >= lo && fit.x_max <= hi {
            break (fit, grid);
        }
        if rebracketed {
            return Err(Error::BracketEscape { x_max: fit.x_max, lo, hi });
        }
        rebracketed = true;
        (lo, hi) = cells_around(fit.x_max.clamp(0.0, diameter), h, diameter);
    };
    let (se_r0, se_h) = delta_method_errors(&fit, template.n, config.samples, config.grid);
    let p_bar = average_connection_probability(&template.with_r0(fit.x_max), derive_seed(seed, 3))?;
    let noise: f64 = grid.iter().map(|p| p.estimate.standard_error.powi(2)).sum();
    Ok(Optimum {
        r0_hat: fit.x_max,
        se_r0,
        h_max: fit.y_max,
        se_h,
        p_bar_max: p_bar.value,
        fit: fit.raw_coefficients(),
        condition_number: fit.condition_number,
        quadratic: fit.clone(),
        bracket: (lo, hi),
        rebracketed,
        boundary_warning: bracket.at_boundary,
        chi2_ratio: if noise > 0.0 { fit.rss / noise } else { f64::NAN },
        grid,
    })
}
