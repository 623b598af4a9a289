//! `cass`: synthetic data generation, subspace segmentation, parameter-grid
//! benchmarks and trace Lasso norm curves.
//!
//! Exit codes: 0 success, 2 usage error, 3 numerical non-convergence,
//! 4 I/O failure.

mod benchmark;
mod error;
mod norms;
mod output;
mod segment;
mod settings;
mod source;
mod synth;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliResult;

#[derive(Parser)]
#[command(name = "cass", version, about = "Subspace segmentation with the trace Lasso")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic union of subspaces.
    Synth(SynthArgs),
    /// Segment a data set.
    Segment(SegmentArgs),
    /// Run a dataset × method × λ grid from a config file.
    Benchmark(BenchmarkArgs),
    /// Trace Lasso against ℓ1 and ℓ2 as column correlation varies.
    Norms(NormsArgs),
}

#[derive(Args)]
pub struct SynthArgs {
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of subspaces.
    #[arg(long)]
    pub k: Option<usize>,
    /// Dimension of every subspace.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Ambient dimension.
    #[arg(long)]
    pub ambient: Option<usize>,
    /// Points per subspace.
    #[arg(long)]
    pub per: Option<usize>,
    /// Noise standard deviation.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Within-subspace correlation in [0, 1).
    #[arg(long)]
    pub correlation: Option<f64>,
    /// Draw bases independently instead of in disjoint blocks.
    #[arg(long)]
    pub dependent: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Data CSV, one sample per row.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Labels CSV (`index,label`).
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Data file (CSV, or IDX images with `--format idx`).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Ground-truth labels (CSV, or IDX labels with `--format idx`).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// csv or idx.
    #[arg(long)]
    pub format: Option<String>,
    /// CSV layout: rows (one sample per row) or columns.
    #[arg(long)]
    pub orientation: Option<String>,
    /// The CSV has a header row.
    #[arg(long)]
    pub header: bool,
    /// cass, ssc, lrr, lsr or knn.
    #[arg(long)]
    pub method: Option<String>,
    /// Number of clusters (defaults to the number of label classes).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep the first m samples of each class.
    #[arg(long)]
    pub per_class: Option<usize>,
    /// PCA dimension applied before segmentation.
    #[arg(long)]
    pub pca_dim: Option<usize>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Labels CSV to write.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON report (default: output with a .json extension).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report path prefix; writes `<output>.csv` and `<output>.json`.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated methods, overriding the config file.
    #[arg(long)]
    pub methods: Option<String>,
}

#[derive(Args)]
pub struct NormsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Ambient dimension (at least columns + 1).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Number of columns.
    #[arg(long)]
    pub columns: Option<usize>,
    /// Number of correlation levels from 0 to 1.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn opt<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(T::to_string)
}

fn path(v: &Option<PathBuf>) -> Option<String> {
    v.as_ref().map(|p| p.display().to_string())
}

fn flag(v: bool) -> Option<String> {
    v.then(|| "true".to_string())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Synth(a) => synth::run(&a),
        Command::Segment(a) => segment::run(&a),
        Command::Benchmark(a) => benchmark::run(&a),
        Command::Norms(a) => norms::run(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cass: {e}");
            e.exit_code()
        }
    }
}

/// Runs `f` on a thread pool of `workers` threads (0 = rayon's default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| error::CliError::usage(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}
