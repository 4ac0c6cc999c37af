//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::Result;
use clap::Args;
use serde::Serialize;

use rgg_entropy::edgeworth::{edgeworth_distribution, fit_entropy_scaling, EdgeworthModel, ScalingFit};
use rgg_entropy::exact_small::{exact_curve, ExactGeometry};
use rgg_entropy::export::{Cell, RunMeta};
use rgg_entropy::geometry::{CoordinateDistribution, Geometry, GeometryKind};
use rgg_entropy::graphs::edge_count_marginals;
use rgg_entropy::limit::{converges_to_er, covariance_model, gaussian_limit_distribution, kurtosis, limit_entropy_curve, CovarianceModel};
use rgg_entropy::mc_entropy::{entropy_curve, estimate_for_spec};
use rgg_entropy::optimize::{optimize_r0, OptimizeConfig, DEFAULT_GRID};
use rgg_entropy::rng::derive_seed;
use rgg_entropy::sampling::{sample_sparse_counts, ConnectionModel, EnsembleSpec};

use crate::input::{load_spec_with_density, parse_dims, parse_distribution, parse_grid};
use crate::output::{emit_json, emit_table, Format, Table};
use crate::{Command, Global};

const DESK_SAMPLES: u64 = 1_000_000;
const PAPER_SAMPLES: u64 = 100_000_000;
const DESK_DRAWS: u64 = 1_000_000;
const PAPER_DRAWS: u64 = 10_000_000;

impl Global {
    fn samples(&self, explicit: Option<u64>) -> u64 {
        explicit.unwrap_or(if self.paper_scale { PAPER_SAMPLES } else { DESK_SAMPLES })
    }

    fn draws(&self, explicit: Option<u64>) -> u64 {
        explicit.unwrap_or(if self.paper_scale { PAPER_DRAWS } else { DESK_DRAWS })
    }

    fn out(&self) -> Option<&Path> {
        self.output.as_deref()
    }
}

pub fn run(global: &Global, command: &Command) -> Result<()> {
    match command {
        Command::ExactCurve(a) => exact(global, a),
        Command::EntropyMc(a) => entropy_mc(global, a),
        Command::Optimize(a) => optimize(global, a),
        Command::Table3(a) => table3(global, a),
        Command::Covariance(a) => covariance(global, a),
        Command::LimitCurve(a) => limit_curve(global, a),
        Command::EdgeworthCurve(a) => edgeworth_curve(global, a),
        Command::Figures(a) => figures(global, a),
    }
}

#[derive(Debug, Args)]
pub struct ExactCurveArgs {
    /// `torus` or `line`.
    #[arg(long)]
    pub geometry: ExactGeometry,
    /// `start:stop:count` or a comma-separated list; defaults to 201 points over `[0, D]`.
    #[arg(long)]
    pub grid: Option<String>,
}

fn exact_table(geometry: ExactGeometry, grid: &[f64]) -> Result<Table> {
    let mut t = Table::new(&["r0", "p0", "p1", "p2", "p3", "entropy_bits", "p_bar"]);
    for r in exact_curve(geometry, grid)? {
        t.push([r.r0, r.p0, r.p1, r.p2, r.p3, r.entropy_bits, r.p_bar].map(Cell::from).to_vec());
    }
    Ok(t)
}

fn default_grid(diameter: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| diameter * i as f64 / (points - 1) as f64).collect()
}

fn exact(global: &Global, a: &ExactCurveArgs) -> Result<()> {
    let grid = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => default_grid(a.geometry.diameter(), 201),
    };
    let meta = RunMeta::new("exact-curve", global.seed, serde_json::json!({ "geometry": a.geometry, "grid": grid }));
    emit_table(global.out(), global.format, &meta, &exact_table(a.geometry, &grid)?)
}

#[derive(Debug, Args)]
pub struct EntropyMcArgs {
    /// Ensemble spec (JSON or TOML).
    #[arg(long)]
    pub spec: PathBuf,
    /// Tabulated coordinate density `x,density` replacing the spec's distribution.
    #[arg(long)]
    pub density_csv: Option<PathBuf>,
    /// Samples per grid point.
    #[arg(long)]
    pub samples: Option<u64>,
    /// r0 grid; defaults to the spec's own r0.
    #[arg(long)]
    pub grid: Option<String>,
    /// Also write `graph_mask,count` for the spec's r0.
    #[arg(long)]
    pub counts_output: Option<PathBuf>,
}

fn entropy_mc(global: &Global, a: &EntropyMcArgs) -> Result<()> {
    let spec = load_spec_with_density(&a.spec, a.density_csv.as_ref())?;
    let l = global.samples(a.samples);
    let grid = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => vec![spec.connection.r0()],
    };
    let curve = if grid.is_empty() { Vec::new() } else { entropy_curve(&spec, &grid, l, global.seed)? };
    let mut t = Table::new(&["r0", "entropy_bits", "corrected_bits", "systematic_error", "standard_error", "L"]);
    for p in &curve {
        let e = p.estimate;
        t.push(vec![p.r0.into(), e.entropy_bits.into(), e.corrected_bits().into(), e.systematic_error.into(), e.standard_error.into(), e.samples.into()]);
    }
    let meta = RunMeta::new("entropy-mc", global.seed, serde_json::json!({ "spec": spec, "L": l, "grid": grid }));
    emit_table(global.out(), global.format, &meta, &t)?;
    if let Some(path) = &a.counts_output {
        let counts = sample_sparse_counts(&spec, l, global.seed)?;
        let mut c = Table::new(&["graph_mask", "count"]);
        for (mask, n) in counts {
            c.push(vec![mask.into(), n.into()]);
        }
        emit_table(Some(path), Format::Csv, &meta, &c)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub density_csv: Option<PathBuf>,
    /// Points in the refined grid.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid_size: usize,
    /// Samples per refined grid point.
    #[arg(long)]
    pub samples: Option<u64>,
    /// Samples per coarse grid point (defaults to `--samples`).
    #[arg(long)]
    pub coarse_samples: Option<u64>,
    /// Refined grid CSV; defaults to `<output>.grid.csv` when `--output` is set.
    #[arg(long)]
    pub grid_output: Option<PathBuf>,
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    r0_hat: f64,
    se_r0: f64,
    #[serde(rename = "H_max")]
    h_max: f64,
    #[serde(rename = "se_H")]
    se_h: f64,
    p_bar_max: f64,
    fit: rgg_entropy::optimize::RawCoefficients,
    condition_number: f64,
    bracket: (f64, f64),
    rebracketed: bool,
    boundary_warning: bool,
    chi2_ratio: f64,
    quadratic: &'a rgg_entropy::optimize::QuadraticFit,
}

fn optimize(global: &Global, a: &OptimizeArgs) -> Result<()> {
    let spec = load_spec_with_density(&a.spec, a.density_csv.as_ref())?;
    let l = global.samples(a.samples);
    let cfg = OptimizeConfig {
        samples: l,
        grid: a.grid_size,
        coarse_samples: a.coarse_samples.unwrap_or(l),
    };
    let o = optimize_r0(&spec, cfg, global.seed)?;
    if o.boundary_warning {
        eprintln!("warning: coarse maximum lies on the edge of [0, D]; bracket widened");
    }
    let meta = RunMeta::new("optimize", global.seed, serde_json::json!({ "spec": spec, "config": cfg }));
    let report = OptimizeReport {
        r0_hat: o.r0_hat,
        se_r0: o.se_r0,
        h_max: o.h_max,
        se_h: o.se_h,
        p_bar_max: o.p_bar_max,
        fit: o.fit,
        condition_number: o.condition_number,
        bracket: o.bracket,
        rebracketed: o.rebracketed,
        boundary_warning: o.boundary_warning,
        chi2_ratio: o.chi2_ratio,
        quadratic: &o.quadratic,
    };
    emit_json(global.out(), &meta, &report)?;
    let grid_path = a.grid_output.clone().or_else(|| global.output.as_ref().map(|p| p.with_extension("grid.csv")));
    if let Some(path) = grid_path {
        let mut t = Table::new(&["r0", "entropy_bits", "corrected_bits", "standard_error"]);
        for p in &o.grid {
            t.push(vec![p.r0.into(), p.estimate.entropy_bits.into(), p.estimate.corrected_bits().into(), p.estimate.standard_error.into()]);
        }
        emit_table(Some(&path), Format::Csv, &meta, &t)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct Table3Args {
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid_size: usize,
    #[arg(long)]
    pub coarse_samples: Option<u64>,
}

/// Rows and columns of the three-node maximum-entropy table.
pub fn table3_cells() -> Vec<(Geometry, ConnectionModel)> {
    let geometries = [
        Geometry::cube(1),
        Geometry::cube(2),
        Geometry::cube(3),
        Geometry::torus(1),
        Geometry::torus(2),
        Geometry::torus(3),
    ];
    let mut cells = Vec::new();
    for g in geometries {
        for eta in 1..=6 {
            cells.push((g, ConnectionModel::Rayleigh { r0: 0.1, eta: eta as f64 }));
        }
        cells.push((g, ConnectionModel::Hard { r0: 0.1 }));
    }
    cells
}

fn connection_label(c: &ConnectionModel) -> String {
    match c {
        ConnectionModel::Hard { .. } => "hard".into(),
        ConnectionModel::Rayleigh { eta, .. } => format!("eta={eta}"),
    }
}

fn table3(global: &Global, a: &Table3Args) -> Result<()> {
    let l = global.samples(a.samples);
    let cfg = OptimizeConfig {
        samples: l,
        grid: a.grid_size,
        coarse_samples: a.coarse_samples.unwrap_or(l),
    };
    let mut t = Table::new(&["geometry", "dimension", "connection", "H_max", "se_H", "r0_hat", "se_r0", "p_bar_max"]);
    for (i, (g, c)) in table3_cells().into_iter().enumerate() {
        let spec = EnsembleSpec::new(g, 3, CoordinateDistribution::Uniform, c);
        let o = optimize_r0(&spec, cfg, derive_seed(global.seed, i as u64))?;
        t.push(vec![
            g.kind.to_string().into(),
            g.dimension.into(),
            connection_label(&c).into(),
            o.h_max.into(),
            o.se_h.into(),
            o.r0_hat.into(),
            o.se_r0.into(),
            o.p_bar_max.into(),
        ]);
    }
    let meta = RunMeta::new("table3", global.seed, serde_json::json!({ "n": 3, "config": cfg }));
    emit_table(global.out(), global.format, &meta, &t)
}

#[derive(Debug, Args)]
pub struct CovarianceArgs {
    /// `cube` or `torus`.
    #[arg(long, value_parser = parse_kind)]
    pub geometry: GeometryKind,
    /// `uniform`, `truncated-gaussian`, `inverted-gaussian` or `bernoulli:<p>`.
    #[arg(long, default_value = "uniform")]
    pub distribution: String,
    #[arg(long)]
    pub density_csv: Option<PathBuf>,
    /// Node count for the spectrum.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Also report third moments.
    #[arg(long)]
    pub third_moments: bool,
}

pub fn parse_kind(s: &str) -> std::result::Result<GeometryKind, String> {
    match s {
        "cube" => Ok(GeometryKind::Cube),
        "torus" => Ok(GeometryKind::Torus),
        _ => Err(format!("unknown geometry {s:?} (cube or torus)")),
    }
}

#[derive(Serialize)]
struct CovarianceReport {
    mu: f64,
    alpha: f64,
    beta: f64,
    gamma: f64,
    kurtosis: Option<f64>,
    converges_to_er: bool,
    eigenvalues: Vec<(f64, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    third_moments: Option<rgg_entropy::edgeworth::ThirdMoments>,
}

fn covariance(global: &Global, a: &CovarianceArgs) -> Result<()> {
    let dist = parse_distribution(&a.distribution, a.density_csv.as_ref())?;
    let mut model = covariance_model(a.geometry, &dist)?;
    if a.third_moments {
        model = model.with_third_moments(&dist)?;
    }
    let er = converges_to_er(a.geometry, &dist)?;
    let report = CovarianceReport {
        mu: model.mu,
        alpha: model.alpha,
        beta: model.beta,
        gamma: model.gamma,
        kurtosis: kurtosis(&dist).ok(),
        converges_to_er: er.converges,
        eigenvalues: model.eigenvalues(a.n),
        third_moments: model.third_moments,
    };
    let meta = RunMeta::new("covariance", global.seed, serde_json::json!({ "geometry": a.geometry, "distribution": dist, "n": a.n }));
    emit_json(global.out(), &meta, &report)
}

#[derive(Debug, Args)]
pub struct LimitCurveArgs {
    #[arg(long, value_parser = parse_kind)]
    pub geometry: GeometryKind,
    #[arg(long, default_value = "uniform")]
    pub distribution: String,
    #[arg(long)]
    pub density_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Grid of normalised ranges; defaults to 25 points over `±3√α`.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Gaussian draws per grid point.
    #[arg(long)]
    pub draws: Option<u64>,
}

fn symmetric_t_grid(model: &CovarianceModel) -> Vec<f64> {
    let s = model.alpha.sqrt();
    (-12..=12).map(|k| k as f64 * 0.25 * s).collect()
}

fn limit_table(model: &CovarianceModel, n: usize, ts: &[f64], draws: u64, seed: u64) -> Result<Table> {
    let mut t = Table::new(&["t", "entropy_bits", "p_bar", "standard_error"]);
    for p in limit_entropy_curve(model, n, ts, draws, seed)? {
        t.push([p.t, p.entropy_bits, p.p_bar, p.standard_error].map(Cell::from).to_vec());
    }
    Ok(t)
}

fn limit_curve(global: &Global, a: &LimitCurveArgs) -> Result<()> {
    let dist = parse_distribution(&a.distribution, a.density_csv.as_ref())?;
    let model = covariance_model(a.geometry, &dist)?;
    let ts = match &a.t_grid {
        Some(g) => parse_grid(g)?,
        None => symmetric_t_grid(&model),
    };
    let draws = global.draws(a.draws);
    let meta = RunMeta::new(
        "limit-curve",
        global.seed,
        serde_json::json!({ "geometry": a.geometry, "distribution": dist, "n": a.n, "t": ts, "M": draws }),
    );
    emit_table(global.out(), global.format, &meta, &limit_table(&model, a.n, &ts, draws, global.seed)?)
}

#[derive(Debug, Args)]
pub struct EdgeworthCurveArgs {
    #[arg(long, value_parser = parse_kind)]
    pub geometry: GeometryKind,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t: f64,
    /// Comma-separated dimensions.
    #[arg(long, default_value = "15,20,25,30,50,100,250")]
    pub dims: String,
    #[arg(long)]
    pub draws: Option<u64>,
    /// JSON file for the fitted `a − b(d^{-1/2} + c)`; stderr when omitted.
    #[arg(long)]
    pub fit_output: Option<PathBuf>,
}

struct EdgeworthRows {
    dims: Vec<usize>,
    entropies: Vec<f64>,
    clamped: Vec<f64>,
    fit: ScalingFit,
    model: EdgeworthModel,
}

fn edgeworth_rows(kind: GeometryKind, n: usize, t: f64, dims: Vec<usize>, draws: u64, seed: u64) -> Result<EdgeworthRows> {
    let model = EdgeworthModel::for_distribution(kind, &CoordinateDistribution::Uniform, n)?;
    let mut entropies = Vec::new();
    let mut clamped = Vec::new();
    for &d in &dims {
        let g = edgeworth_distribution(&model, t, d, draws, seed)?;
        entropies.push(g.entropy_bits);
        clamped.push(g.clamped_mass.unwrap_or(0.0));
    }
    let pts: Vec<(f64, f64)> = dims.iter().zip(&entropies).map(|(d, h)| (*d as f64, *h)).collect();
    let fit = fit_entropy_scaling(&pts)?;
    Ok(EdgeworthRows {
        dims,
        entropies,
        clamped,
        fit,
        model,
    })
}

fn edgeworth_curve(global: &Global, a: &EdgeworthCurveArgs) -> Result<()> {
    let draws = global.draws(a.draws);
    let rows = edgeworth_rows(a.geometry, a.n, a.t, parse_dims(&a.dims)?, draws, global.seed)?;
    let mut t = Table::new(&["d", "entropy_bits", "clamped_mass"]);
    for i in 0..rows.dims.len() {
        t.push(vec![rows.dims[i].into(), rows.entropies[i].into(), rows.clamped[i].into()]);
    }
    let meta = RunMeta::new(
        "edgeworth-curve",
        global.seed,
        serde_json::json!({ "geometry": a.geometry, "n": a.n, "t": a.t, "dims": rows.dims, "M": draws }),
    );
    emit_table(global.out(), global.format, &meta, &t)?;
    match &a.fit_output {
        Some(p) => emit_json(Some(p), &meta, rows.fit)?,
        None => eprintln!("{}", serde_json::to_string(&rows.fit)?),
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// Output directory.
    #[arg(long, default_value = "figures")]
    pub out_dir: PathBuf,
    /// Dimensions for the Edgeworth comparison.
    #[arg(long, default_value = "15,20,25,30,50,100,250")]
    pub dims: String,
}

fn figures(global: &Global, a: &FiguresArgs) -> Result<()> {
    let dir = &a.out_dir;
    std::fs::create_dir_all(dir)?;
    let draws = global.draws(None);
    let samples = global.samples(None);
    let seed = global.seed;
    let csv = |name: &str, meta: &RunMeta, t: &Table| emit_table(Some(&dir.join(name)), Format::Csv, meta, t);

    for g in [ExactGeometry::Torus1D, ExactGeometry::Line1D] {
        let grid = default_grid(g.diameter(), 201);
        let meta = RunMeta::new("figures", seed, serde_json::json!({ "figure": "exact", "geometry": g }));
        csv(&format!("exact_{}.csv", serde_json::to_value(g)?.as_str().unwrap_or("exact")), &meta, &exact_table(g, &grid)?)?;
    }

    let dists = [("uniform", CoordinateDistribution::Uniform), ("truncated-gaussian", CoordinateDistribution::TruncatedGaussian)];
    for kind in [GeometryKind::Cube, GeometryKind::Torus] {
        for (label, dist) in &dists {
            let model = covariance_model(kind, dist)?;
            for n in [3usize, 7] {
                let g = gaussian_limit_distribution(&model, n, 0.0, draws, seed)?;
                let (raw, norm) = edge_count_marginals(&g);
                let mut t = Table::new(&["edges", "probability", "normalised"]);
                for k in 0..raw.len() {
                    t.push(vec![k.into(), raw[k].into(), norm[k].into()]);
                }
                let meta = RunMeta::new(
                    "figures",
                    seed,
                    serde_json::json!({ "figure": "edge-count-marginal", "geometry": kind, "distribution": dist, "n": n, "t": 0.0, "M": draws }),
                );
                csv(&format!("marginal_{kind}_{label}_n{n}.csv"), &meta, &t)?;
            }
        }
        let model = covariance_model(kind, &CoordinateDistribution::Uniform)?;
        let ts = symmetric_t_grid(&model);
        for n in [3usize, 11] {
            let meta = RunMeta::new(
                "figures",
                seed,
                serde_json::json!({ "figure": "limit-entropy", "geometry": kind, "n": n, "t": ts, "M": draws }),
            );
            csv(&format!("limit_entropy_{kind}_n{n}.csv"), &meta, &limit_table(&model, n, &ts, draws, seed)?)?;
        }

        let dims = parse_dims(&a.dims)?;
        let rows = edgeworth_rows(kind, 4, 0.0, dims, draws, seed)?;
        let gaussian = gaussian_limit_distribution(&rows.model.base, 4, 0.0, draws, seed)?.entropy_bits;
        let mut t = Table::new(&["d", "gaussian_entropy", "edgeworth_entropy", "simulated_entropy", "fit_a", "fit_b", "fit_c"]);
        for (i, &d) in rows.dims.iter().enumerate() {
            let r0 = rows.model.base.r0_for_t(0.0, d)?;
            let spec = EnsembleSpec::new(Geometry::new(kind, d)?, 4, CoordinateDistribution::Uniform, ConnectionModel::Hard { r0 });
            let simulated = estimate_for_spec(&spec, samples, derive_seed(seed, i as u64))?.corrected_bits();
            t.push(vec![
                d.into(),
                gaussian.into(),
                rows.entropies[i].into(),
                simulated.into(),
                rows.fit.a.into(),
                rows.fit.b.into(),
                rows.fit.c.into(),
            ]);
        }
        let meta = RunMeta::new(
            "figures",
            seed,
            serde_json::json!({ "figure": "edgeworth", "geometry": kind, "n": 4, "t": 0.0, "dims": rows.dims, "M": draws, "L": samples }),
        );
        csv(&format!("edgeworth_{kind}_n4.csv"), &meta, &t)?;
    }
    Ok(())
}
