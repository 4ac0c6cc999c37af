//! `rgg-entropy` command-line front end.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "rgg-entropy", version, about = "Entropy of random geometric graph ensembles")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Base random seed.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "RGG_THREADS")]
    pub threads: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = output::Format::Csv)]
    pub format: output::Format,
    /// Use the large sample budgets (L = 10^8, M = 10^7).
    #[arg(long, global = true)]
    pub paper_scale: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form three-node curve on the circle or the line.
    ExactCurve(commands::ExactCurveArgs),
    /// Monte-Carlo entropy of an ensemble over an r0 grid.
    EntropyMc(commands::EntropyMcArgs),
    /// Entropy-maximising r0 with delta-method errors.
    Optimize(commands::OptimizeArgs),
    /// Maximum entropy for three nodes across geometries and connection models.
    Table3(commands::Table3Args),
    /// Limiting covariance constants and the Erdős–Rényi classifier.
    Covariance(commands::CovarianceArgs),
    /// Gaussian-limit entropy over a grid of normalised ranges.
    LimitCurve(commands::LimitCurveArgs),
    /// Edgeworth-corrected entropy against dimension.
    EdgeworthCurve(commands::EdgeworthCurveArgs),
    /// All plot-ready data sets into one directory.
    Figures(commands::FiguresArgs),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<rgg_entropy::Error>()) {
        Some(e) if e.is_numeric() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(&cli.global, &cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
