use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "pcosync",
    version,
    about = "Pulse-coupled oscillator synchronization under stochastic vertex triggering",
    args_override_self = true
)]
pub struct Cli {
    /// JSON object of flag values; its entries override the command line.
    #[arg(long, global = true, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Worker threads for batch runs. Results do not depend on it.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub jobs: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Run one trajectory and write the hybrid arc as JSON.
    Simulate(SimulateArgs),
    /// Seeded batch of runs; writes the sync-time tail table.
    Montecarlo(MontecarloArgs),
    /// Paired-seed comparison of update rules across graph families.
    Compare(CompareArgs),
    /// Constants of the exponential sync-time tail bound.
    Bound(BoundArgs),
    /// Replay the synchronization string deterministically.
    StringCheck(StringCheckArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tie {
    ToZero,
    ToOne,
    Random,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Order {
    Ascending,
    Random,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    /// complete:N, path:N, cycle:N, regular:D:N, random-rooted:N:P[:SEED] or file:PATH
    #[arg(long)]
    pub graph: String,

    /// Oscillation period.
    #[arg(long = "T", default_value_t = 1.0)]
    pub period: f64,

    /// binary or linear:M1:M2
    #[arg(long, default_value = "binary")]
    pub rule: String,

    /// Thresholds: uniform, one value for every agent, or a comma list.
    #[arg(long, default_value = "0.5")]
    pub r: String,

    #[arg(long, value_enum, default_value_t = Tie::ToOne)]
    pub tie: Tie,

    /// vertex:P, vertex:P1,..,PN, edge:P or masks:PATH[:repeat]
    #[arg(long, default_value = "vertex:0.5")]
    pub trigger: String,

    /// Master seed.
    #[arg(long, env = "PCOSYNC_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Reject graphs without a root.
    #[arg(long)]
    pub require_rooted: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Initial phases: uniform, const:MU or a comma list.
    #[arg(long, default_value = "uniform")]
    pub init: String,

    /// Synchronization tolerance on V; 0 means exact.
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,

    #[arg(long, default_value_t = 500.0)]
    pub max_time: f64,

    #[arg(long, default_value_t = 1_000_000)]
    pub max_jumps: u64,

    /// Firing order among agents reaching 1 together.
    #[arg(long, value_enum, default_value_t = Order::Ascending)]
    pub order: Order,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,

    /// Keep running after synchronization until a cap is hit.
    #[arg(long)]
    pub no_stop_on_sync: bool,

    /// Arc JSON destination; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// Optional per-jump table `t,k,firer,V`.
    #[arg(long)]
    #[serde(skip)]
    pub events_csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MontecarloArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub run: RunArgs,

    #[arg(long, default_value_t = 1000)]
    pub runs: usize,

    /// Tail bin width in time units, or `tstar` for the bound's horizon.
    #[arg(long, default_value = "5")]
    pub bin: String,

    /// Tail CSV destination; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,

    /// Optional per-run CSV.
    #[arg(long)]
    #[serde(skip)]
    pub batch_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Comma list of binary[:R] and linear:M1:M2.
    #[arg(long, default_value = "binary,linear:0.3261:0.46")]
    pub rules: String,

    /// Comma list of complete, path, cycle, regular:D, random-rooted:P[:SEED].
    #[arg(long, default_value = "complete,path,cycle,regular:5")]
    pub families: String,

    /// Sizes: N, A:B:STEP or a comma list. A single size for slope sweeps.
    #[arg(long, default_value = "10:100:10")]
    pub n: String,

    /// Run a slope sweep over A:B:STEP instead of comparing `--rules`.
    #[arg(long)]
    pub slope_sweep: Option<String>,

    #[arg(long, default_value_t = 50)]
    pub runs: usize,

    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,

    /// Shared triggering probability.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,

    #[arg(long = "T", default_value_t = 1.0)]
    pub period: f64,

    #[arg(long, default_value_t = 500.0)]
    pub max_time: f64,

    #[arg(long, default_value_t = 1_000_000)]
    pub max_jumps: u64,

    #[arg(long, env = "PCOSYNC_SEED", default_value_t = 0)]
    pub seed: u64,

    /// CSV destination; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[command(flatten)]
    pub model: ModelArgs,

    /// Number of tail values rho^n to list.
    #[arg(long, default_value_t = 3)]
    pub n_max: u32,

    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct StringCheckArgs {
    /// complete:N, path:N, cycle:N, regular:D:N, random-rooted:N:P[:SEED] or file:PATH
    #[arg(long)]
    pub graph: String,

    /// Root to build the string from; defaults to the smallest root.
    #[arg(long)]
    pub root: Option<usize>,

    #[arg(long, default_value = "0.5")]
    pub r: String,

    #[arg(long, value_enum, default_value_t = Tie::ToOne)]
    pub tie: Tie,

    #[arg(long = "T", default_value_t = 1.0)]
    pub period: f64,

    /// Initial phases: uniform, const:MU or a comma list.
    #[arg(long, default_value = "uniform")]
    pub init: String,

    /// File of masks fed before the string.
    #[arg(long)]
    pub prefix: Option<PathBuf>,

    /// Number of initial conditions; run i is seeded from (seed, i).
    #[arg(long, default_value_t = 1)]
    pub runs: usize,

    #[arg(long, env = "PCOSYNC_SEED", default_value_t = 0)]
    pub seed: u64,

    /// Report JSON destination; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}
