//! Command-line front end: builds systems from shorthand or JSON specs,
//! runs the checks and experiments of `qoslab-core` and writes
//! reproducible JSON reports and CSV tables.
//!
//! Exit codes: 0 every selected check passed, 1 a check failed, 2 usage or
//! configuration error.

pub mod commands;
pub mod formats;
pub mod systems;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

impl From<qoslab_core::Error> for UsageError {
    fn from(e: qoslab_core::Error) -> Self {
        UsageError(e.to_string())
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(
    name = "qoslab",
    version,
    about = "Quantized orthonormal system experiments"
)]
pub struct Cli {
    /// Master seed; falls back to QOSLAB_SEED, then 0.
    #[arg(long, global = true, env = "QOSLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Orthonormality, uniform bound, Parseval, Riesz, contraction and
    /// ensemble comparisons.
    Verify(VerifyArgs),
    /// Lower bounds for type and cotype constants, the degenerate bound
    /// and the Pisier ratio.
    Estimate(EstimateArgs),
    /// Matrix central limit experiment.
    Clt(CltArgs),
    /// Disjoint-spectrum approximation of dyadic functions.
    Approx(ApproxArgs),
    /// Forward and inverse transforms of stored data, or a round-trip audit.
    Transform(TransformArgs),
    /// Summary of previously written reports.
    Report(ReportArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long)]
    pub system: String,
    /// Comma list of orthonormality, uniform-bound, parseval, riesz,
    /// contraction, steinhaus, gaussian.
    #[arg(long, value_delimiter = ',')]
    pub check: Vec<String>,
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long, default_value = "2")]
    pub q: String,
    #[arg(long = "E", default_value = "scalar")]
    pub e: String,
    #[arg(long)]
    pub sigma: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Matrix amplification level of the Riesz check.
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    /// Ensemble size for the comparison checks.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = qoslab_core::experiments::DEFAULT_C_MAX)]
    pub c_max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Constants,
    Degenerate,
    Pisier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Identity,
    Transpose,
    Random,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    /// Defaults to `signs:m=<k>`, the exact classical Rademacher system on
    /// `k` signs, with `k` from `--sigma` (or 2).
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long = "E", default_value = "scalar")]
    pub e: String,
    #[arg(long, default_value = "2")]
    pub p: String,
    /// `all`, a count `k` (first `k` indices) or a comma list of ids.
    #[arg(long)]
    pub sigma: Option<String>,
    /// exact-svd, stochastic-ascent or exhaustive-signs; by default exact-svd
    /// for Hilbertian E and stochastic-ascent otherwise.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub budget: usize,
    #[arg(long, value_enum, default_value_t = Target::Constants)]
    pub target: Target,
    /// Map on S²_d for `--target pisier`.
    #[arg(long, value_enum, default_value_t = MapKind::Transpose)]
    pub map: MapKind,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct CltArgs {
    #[arg(long, default_value = "2")]
    pub dims: String,
    /// s2sq, s<q>p<k>, e<i><j>sq or e<i><j>p<k>.
    #[arg(long, default_value = "s4p4")]
    pub h: String,
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 4, 16, 64])]
    pub m: Vec<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct ApproxArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.25, 0.125, 0.0625])]
    pub eps: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Args, Debug, Serialize)]
pub struct TransformArgs {
    #[arg(long)]
    pub system: String,
    #[arg(long = "E", default_value = "scalar")]
    pub e: String,
    /// Round-trip audit on random polynomials instead of transforming input.
    #[arg(long)]
    pub roundtrip: bool,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Coefficients `{id: [[re, im], …]}` (inverse) or point values
    /// `[[[re, im], …], …]` (forward).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Direction::Inverse)]
    pub direction: Direction,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// Report files written by other subcommands.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return EXIT_USAGE;
        }
        // the global pool can only be set once per process; later calls keep it
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }
    match commands::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
