use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mbt", version, about = "Minimum broadcast time: bounds, heuristics and exact solving")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lower and upper bounds for one instance
    Bounds(BoundsArgs),
    /// Exact broadcast time by repeated decision solves
    Solve(SolveArgs),
    /// Lookahead construction of a schedule
    Heuristic(HeuristicArgs),
    /// Bounds, heuristics and exact solves over a dataset or a random sweep
    Bench(BenchArgs),
    /// Write a random instance
    Generate(GenerateArgs),
    /// Write an integer program as CPLEX LP text
    ExportLp(ExportLpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum StartFromArg {
    /// Best combinatorial lower bound
    #[default]
    Deg,
    /// Relaxation search on top of the combinatorial bound
    Lp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Highs,
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum MatcherArg {
    #[default]
    Cardinality,
    VertexWeight,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Opt,
    Dec,
    Makespan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum InstanceFormat {
    #[default]
    EdgeList,
    Stp,
}

/// Where an instance comes from: a file, or the random generator.
#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Instance file; `.stp` is read as SteinLib, anything else as an edge list
    pub input: Option<PathBuf>,
    /// Comma-separated source ids, replacing those of the input
    #[arg(long, value_delimiter = ',')]
    pub sources: Option<Vec<usize>>,
    /// Generator: number of nodes (used when no input file is given)
    #[arg(long)]
    pub n: Option<usize>,
    /// Generator: probability of each extra edge
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    /// Generator: number of sources, ids 1..=sigma
    #[arg(long, default_value_t = 1)]
    pub sigma: usize,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Backend; defaults to the external command when MBT_SOLVER_CMD is set
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    /// Command template for the external solver ({lp}, {sol}, {time})
    #[arg(long)]
    pub solver_cmd: Option<String>,
    /// Time limit in seconds
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Lookahead values for the upper bounds
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub ks: Vec<usize>,
    /// Add the relaxation bound (LP solves)
    #[arg(long)]
    pub lp: bool,
    /// Add the relaxed round-minimizing value at the best upper bound horizon
    #[arg(long)]
    pub zeta: bool,
    #[arg(long, value_enum, default_value_t = MatcherArg::Cardinality)]
    pub matcher: MatcherArg,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum, default_value_t = StartFromArg::Deg)]
    pub start_from: StartFromArg,
    /// Seed the search with the schedule of this lookahead heuristic
    #[arg(long)]
    pub ub: Option<usize>,
    /// Write the optimal schedule to this file (`-` for stdout)
    #[arg(long)]
    pub emit_schedule: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct HeuristicArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Lookahead horizon
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MatcherArg::Cardinality)]
    pub matcher: MatcherArg,
    /// Write the schedule to this file (`-` for stdout)
    #[arg(long)]
    pub emit_schedule: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Directory of instance files; replaces the random sweep
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Keep only dataset instances with this many nodes
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Keep only dataset instances with this many edges
    #[arg(long)]
    pub edges: Option<usize>,
    /// Sweep: node counts
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Sweep: edge probabilities
    #[arg(long, value_delimiter = ',')]
    pub p: Vec<f64>,
    /// Sweep: number of sources
    #[arg(long, default_value_t = 1)]
    pub sigma: usize,
    /// Sweep: instances per (n, p) pair
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    /// Sweep: seed of the first instance; the others follow consecutively
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Lookahead values for the upper bounds
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
    pub ks: Vec<usize>,
    /// Do not compute the relaxation bound
    #[arg(long)]
    pub skip_lp: bool,
    /// Do not run the exact solver
    #[arg(long)]
    pub skip_opt: bool,
    #[arg(long, value_enum, default_value_t = StartFromArg::Deg)]
    pub start_from: StartFromArg,
    #[arg(long, value_enum, default_value_t = MatcherArg::Cardinality)]
    pub matcher: MatcherArg,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Write the CSV here instead of stdout
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1)]
    pub sigma: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = InstanceFormat::EdgeList)]
    pub format: InstanceFormat,
    /// Output file (stdout when absent)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ExportLpArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = ModelArg::Dec)]
    pub model: ModelArg,
    /// Horizon
    #[arg(long)]
    pub t: usize,
    /// Drop integrality
    #[arg(long)]
    pub relaxed: bool,
    /// Decision model without the per-round send limit rows
    #[arg(long)]
    pub without_capacity: bool,
    /// Output file (stdout when absent)
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
