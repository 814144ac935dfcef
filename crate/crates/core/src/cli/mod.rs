//! Command-line front end. The `dpinv` binary is a thin wrapper around
//! [`run`], which is also what the tests drive.
//!
//! Exit codes: 0 success, 1 usage, 2 input validation, 3 numerical failure.

mod commands;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use verify::{verify_graph, Check, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "dpinv", version, about = "Stationary vectors, Laplacian pseudo-inverses and walk metrics for digraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate a preferential-attachment digraph with extra one-way arcs
    Gen(GenArgs),
    /// Stationary distribution by subspace iteration
    Stationary(StationaryArgs),
    /// Columns of the pseudo-inverse of L^r or L^d
    Pinv(PinvArgs),
    /// Columns of the pseudo-inverse of a general Laplacian given as a matrix
    GeneralPinv(GeneralPinvArgs),
    /// Hitting/commute times, visits, pass probabilities, Kemeny constant
    Metrics(MetricsArgs),
    /// Size sweep reporting product counts and solver time
    Bench(BenchArgs),
    /// Check solver output against dense reference computations
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SeedArg {
    /// RNG seed
    #[arg(long, env = "DPINV_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(3..))]
    pub n: u64,
    /// Backbone edges per new node
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub attach: u64,
    /// Extra random one-way arcs (default: n)
    #[arg(long)]
    pub extra: Option<usize>,
    #[command(flatten)]
    pub seed: SeedArg,
    /// Edge-list output (stdout if absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report with the arc accounting
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct StationaryArgs {
    /// Edge-list file
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub ell: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum EulerianKind {
    R,
    D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum BlockFormat {
    Csv,
    Raw,
}

#[derive(Args, Debug)]
pub struct PinvArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "d")]
    pub kind: EulerianKind,
    /// Comma-separated column ids or `all`
    #[arg(long, default_value = "all")]
    pub cols: String,
    /// GMRES restart length and subspace block size
    #[arg(long, default_value_t = 30)]
    pub ell: usize,
    /// GMRES residual tolerance
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Stationary residual tolerance
    #[arg(long, default_value_t = 1e-12)]
    pub pi_tol: f64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: BlockFormat,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GeneralPinvArgs {
    /// Matrix Market file holding the Laplacian
    #[arg(long)]
    pub laplacian: PathBuf,
    /// Right null vector file, or `ones`
    #[arg(long, default_value = "ones")]
    pub nullvec: String,
    #[arg(long, default_value = "all")]
    pub cols: String,
    /// Reduction pivot (default: largest stationary probability)
    #[arg(long)]
    pub pivot: Option<usize>,
    #[arg(long, default_value_t = 30)]
    pub ell: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub pi_tol: f64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: BlockFormat,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long, value_enum, default_value = "d")]
    pub kind: EulerianKind,
    /// Pairs `i:k,...` for hitting and commute times
    #[arg(long)]
    pub pairs: Option<String>,
    /// Triples `i:j:k,...` for visit counts and pass probabilities
    #[arg(long)]
    pub triples: Option<String>,
    /// Print the Kemeny constant
    #[arg(long)]
    pub kemeny: bool,
    /// Add an evaporating node with this probability and print influence scores
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Restart distribution of the evaporating node (default uniform)
    #[arg(long, requires = "gamma")]
    pub restart: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub ell: usize,
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub pi_tol: f64,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [1024usize, 2048, 4096])]
    pub sizes: Vec<usize>,
    /// Number of seeds per size, starting at --seed
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[arg(long, default_value_t = 2)]
    pub attach: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 30)]
    pub ell: usize,
    /// Timed runs of the column solve per sample (median kept)
    #[arg(long, default_value_t = 11, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report with per-seed samples and growth factors
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    SmallRandom,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["graph", "suite"]))]
pub struct VerifyArgs {
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Column block (CSV) to certify instead of recomputing it
    #[arg(long, requires = "graph")]
    pub pinv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "d")]
    pub kind: EulerianKind,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Graphs in the random suite
    #[arg(long, default_value_t = 30)]
    pub count: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Maps a library error to the exit-code contract.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DimensionMismatch { .. }
        | Error::InvalidInput(_)
        | Error::NonPositiveScale { .. }
        | Error::ZeroOutDegree { .. }
        | Error::NotStronglyConnected { .. }
        | Error::NotStochastic { .. }
        | Error::MissingColumn { .. }
        | Error::PropertyViolated { .. }
        | Error::Parse { .. }
        | Error::Io(_) => EXIT_INPUT,
        Error::RankDeficient { .. }
        | Error::SchurNoConvergence { .. }
        | Error::ComplexLeadingBlock
        | Error::Singular { .. }
        | Error::StationaryNotConverged { .. }
        | Error::GmresNotConverged { .. }
        | Error::Numerical(_) => EXIT_NUMERICAL,
    }
}

/// Parses `args` (including the program name) and runs the command. Data
/// without an `--out` path goes to `out`; diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
