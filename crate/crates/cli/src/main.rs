//! `bippr`: command-line front end for the bidirectional estimators.

mod commands;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bippr_core::Error as CoreError;

#[derive(Debug, Parser)]
#[command(
    name = "bippr",
    version,
    about = "Bidirectional personalized PageRank and random-walk estimators"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Edge list (`u v [w]` per line) or binary graph snapshot.
    #[arg(long, global = true)]
    pub graph: Option<PathBuf>,
    /// Treat every edge as undirected.
    #[arg(long, global = true)]
    pub undirected: bool,
    /// Teleport probability.
    #[arg(long, global = true, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact values by power iteration.
    Oracle(OracleArgs),
    /// Dump a single reverse or forward push run.
    Push(PushArgs),
    /// Estimate pi_s[t].
    Estimate(EstimateArgs),
    /// Estimate multi-step transition probabilities for every length.
    EstimateMstp(MstpArgs),
    /// Estimate a heat-kernel score.
    HeatKernel(HeatKernelArgs),
    /// Personalized search over a keyword's targets.
    Search(SearchArgs),
    /// Build a keyword search index.
    PrecomputeSearch(PrecomputeSearchArgs),
    /// Sample walks conditioned on ending in a target set.
    SamplePath(SamplePathArgs),
    /// Walk-sharing precomputation written as shard files.
    Precompute(PrecomputeArgs),
    /// Answer queries from precomputed shard files.
    ServeSim(ServeSimArgs),
    /// Compare the bidirectional estimator with Monte Carlo.
    Bench(BenchArgs),
    /// Write a synthetic edge list.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Ppr,
    Mstp,
    HeatKernel,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SourceArgs {
    /// Source node label.
    #[arg(
        long,
        conflicts_with = "source_file",
        required_unless_present = "source_file"
    )]
    pub source: Option<String>,
    /// Source distribution, one `node weight` pair per line.
    #[arg(long)]
    pub source_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[arg(value_enum)]
    pub kind: OracleKind,
    #[command(flatten)]
    pub source: SourceArgs,
    /// Walk length for `mstp`.
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
    /// Heat-kernel parameter for `heat-kernel`.
    #[arg(long, default_value_t = 5.0)]
    pub t: f64,
    /// Power-iteration tolerance for `ppr`.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Reverse,
    Forward,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PushArgs {
    #[arg(value_enum)]
    pub direction: Direction,
    /// Target (reverse) or source (forward) label.
    #[arg(long)]
    pub node: String,
    #[arg(long)]
    pub rmax: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub target: String,
    /// Minimum resolved probability; defaults to 4/n, or d_t/2m with
    /// --undirected-variant.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Use delta = global PageRank of the target.
    #[arg(long, conflicts_with = "delta")]
    pub delta_from_pagerank: bool,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub pfail: f64,
    /// Walk constant.
    #[arg(long, default_value_t = 7.0)]
    pub c: f64,
    /// Use the walk constant of the accuracy guarantee instead of --c.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Max-residual reverse push that balances reverse and walk work.
    #[arg(long, conflicts_with_all = ["rmax", "undirected_variant", "monte_carlo"])]
    pub balanced: bool,
    /// Walk cost in reverse work units for --balanced.
    #[arg(long, default_value_t = 1.0)]
    pub walk_time_constant: f64,
    /// Forward push from the source and walks from the target (undirected graphs).
    #[arg(long, conflicts_with = "monte_carlo")]
    pub undirected_variant: bool,
    /// Plain Monte Carlo with this many walks.
    #[arg(long)]
    pub monte_carlo: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MstpArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub ell_max: usize,
    /// Defaults to 4/n.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.1)]
    pub pfail: f64,
    #[arg(long, default_value_t = 7.0)]
    pub c: f64,
    #[arg(long)]
    pub strict: bool,
    /// Reverse threshold; defaults to sqrt(delta / c).
    #[arg(long)]
    pub epsr: Option<f64>,
    /// Score walks with multiplier l instead of l + 1.
    #[arg(long)]
    pub literal_multiplier: bool,
    /// Estimate first-hitting probabilities instead.
    #[arg(long)]
    pub hitting: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HeatKernelArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = 5.0)]
    pub t: f64,
    /// Truncation length; defaults to round(t + 10 sqrt(t)).
    #[arg(long)]
    pub ell_max: Option<usize>,
    /// Defaults to 4/n.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 7.0)]
    pub c: f64,
    #[arg(long)]
    pub epsr: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMethod {
    Direct,
    Grouped,
    Sampling,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SearchArgs {
    /// Index written by precompute-search.
    #[arg(long)]
    pub index: PathBuf,
    #[arg(long)]
    pub keyword: String,
    #[arg(long)]
    pub source: String,
    #[arg(long, default_value_t = 3)]
    pub topk: usize,
    #[arg(long, value_enum, default_value_t = SearchMethod::Grouped)]
    pub method: SearchMethod,
    /// Forward walks from the source.
    #[arg(long, default_value_t = 10_000)]
    pub walks: usize,
    /// Samples drawn by --method sampling.
    #[arg(long, default_value_t = 100_000)]
    pub nsamples: usize,
    /// Rescore the sampled top-k by direct dot products.
    #[arg(long)]
    pub refine: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PrecomputeSearchArgs {
    /// Sidecar of `keyword<TAB>node` lines.
    #[arg(long)]
    pub keywords: PathBuf,
    /// Index file to write.
    #[arg(long)]
    pub index: PathBuf,
    #[arg(
        long,
        conflicts_with = "adaptive",
        required_unless_present = "adaptive"
    )]
    pub rmax: Option<f64>,
    /// Choose r_max per keyword from the target set's PageRank mass.
    #[arg(long)]
    pub adaptive: bool,
    /// Query-time walk budget assumed by --adaptive.
    #[arg(long, default_value_t = 10_000)]
    pub walks: usize,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 0.77)]
    pub beta: f64,
    #[arg(long, default_value_t = 20.0)]
    pub c: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SamplePathArgs {
    #[arg(long)]
    pub source: String,
    /// Comma-separated labels, or a file of whitespace-separated labels.
    #[arg(long)]
    pub targets: String,
    #[arg(long, default_value_t = 0.01)]
    pub epsr: f64,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Acceptance attempts before giving up on a path.
    #[arg(long, default_value_t = 1_000_000)]
    pub cap: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PrecomputeArgs {
    /// Directory for manifest.bin and shard files.
    #[arg(long)]
    pub out: PathBuf,
    /// Defaults to 4/n.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub dmax: usize,
    #[arg(long, default_value_t = 1)]
    pub shards: usize,
    #[arg(long, default_value_t = 7.0)]
    pub c1: f64,
    /// Reverse-residual constant; fitted on the graph when omitted.
    #[arg(long)]
    pub c2: Option<f64>,
    /// Forward-residual constant; fitted on the graph when omitted.
    #[arg(long)]
    pub c3: Option<f64>,
    /// Nodes sampled when fitting c2 and c3.
    #[arg(long, default_value_t = 100)]
    pub fit_nodes: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ServeSimArgs {
    /// Directory written by precompute.
    #[arg(long)]
    pub dir: PathBuf,
    /// Query `s,t`; repeatable.
    #[arg(long)]
    pub query: Vec<String>,
    /// File of `s t` or `s,t` lines.
    #[arg(long)]
    pub queries: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Uniform,
    Pagerank,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Uniform)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    /// Defaults to 4/n.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 7.0)]
    pub c: f64,
    /// Monte Carlo takes ceil(mc_c / delta) walks.
    #[arg(long, default_value_t = 30.0)]
    pub mc_c: f64,
    /// Skip oracle accuracy above this many nodes.
    #[arg(long, default_value_t = 20_000)]
    pub oracle_max_n: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KindArg {
    Cycle,
    Star,
    Grid,
    PowerLaw,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long)]
    pub n: usize,
}

/// Bad command-line usage detected after parsing.
#[derive(Debug)]
pub struct Usage(pub String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Usage>().is_some() {
        return EXIT_USAGE;
    }
    match err.downcast_ref::<CoreError>() {
        Some(e) if e.is_numerical() => EXIT_NUMERICAL,
        Some(CoreError::InvalidParameter(_) | CoreError::UnknownKind(_)) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
