//! `attnsched`: estimate follower populations, score and optimize broadcast
//! schedules, replay them by simulation and analyze timeline clusters.

mod analyze;
mod error;
mod estimate;
mod evaluate;
mod files;
mod optimize;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use attnsched_core::optimize::HeuristicKind;
use attnsched_core::{ClusterExponent, GammaMode, RunConfig, SurvivalFamily};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use error::CliResult;

#[derive(Debug, Parser)]
#[command(
    name = "attnsched",
    version,
    about = "Broadcast scheduling under limited attention"
)]
struct Cli {
    /// JSON run configuration; explicit flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print the report as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a problem instance from an activity trace and follow graph.
    Estimate(EstimateArgs),
    /// Score a schedule against an instance.
    Evaluate(EvaluateArgs),
    /// Search for a schedule, or build a heuristic one.
    Optimize(OptimizeArgs),
    /// Replay a schedule by Monte Carlo and compare with the objective.
    Simulate(SimulateArgs),
    /// Timeline cluster statistics and reaction tests.
    Analyze(AnalyzeArgs),
}

/// Parses a value by its JSON/config spelling.
fn named<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned()))
        .map_err(|_| format!("unrecognized value {s:?}"))
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    producer: String,
    #[arg(long)]
    slots: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    tz_offset_minutes: Option<i32>,
    #[arg(long)]
    gap_hours: Option<f64>,
    #[arg(long)]
    delta_fallback: Option<f64>,
    #[arg(long)]
    mu_fallback: Option<f64>,
    /// uniform or reaction_rate
    #[arg(long, value_parser = named::<GammaMode>)]
    gamma: Option<GammaMode>,
    #[arg(long, value_parser = named::<SurvivalFamily>)]
    follower_survival_family: Option<SurvivalFamily>,
    #[arg(long, value_parser = named::<SurvivalFamily>)]
    cluster_survival_family: Option<SurvivalFamily>,
    /// size_minus_one or size
    #[arg(long, value_parser = named::<ClusterExponent>)]
    cluster_exponent: Option<ClusterExponent>,
    /// Instance output; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-user activity histogram CSV (followers and competitors).
    #[arg(long)]
    histogram: Option<PathBuf>,
    #[arg(long)]
    mean_center: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    /// Per-cluster attention CSV.
    #[arg(long)]
    breakdown: Option<PathBuf>,
    /// Broadcast slot x login slot attention CSV.
    #[arg(long)]
    heatmap: Option<PathBuf>,
    #[arg(long)]
    mean_center: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Marginal,
    Brute,
    Multistart,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Marginal)]
    method: Method,
    /// Starting schedule for marginal allocation.
    #[arg(long)]
    initial: Option<PathBuf>,
    /// Overrides the instance budget.
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest schedule count brute force may enumerate.
    #[arg(long)]
    enumeration_cap: Option<u64>,
    #[arg(long, value_parser = named::<HeuristicKind>, conflicts_with_all = ["initial", "restarts"])]
    heuristic: Option<HeuristicKind>,
    /// Posts a heuristic spends; defaults to the budget.
    #[arg(long, requires = "heuristic")]
    spend: Option<u64>,
    /// Schedule output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accepted steps as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    schedule: PathBuf,
    #[arg(long)]
    days: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Merge adjacent producer clusters with no competitor post between them.
    #[arg(long)]
    merged: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, requires = "graph", conflicts_with = "counts")]
    trace: Option<PathBuf>,
    #[arg(long, requires = "trace")]
    graph: Option<PathBuf>,
    /// Analyze one user's timeline.
    #[arg(long, conflicts_with = "all")]
    user: Option<String>,
    /// Pool every timeline in the graph.
    #[arg(long)]
    all: bool,
    /// Aggregate `size,reactions,total` table instead of a trace.
    #[arg(long)]
    counts: Option<PathBuf>,
    #[arg(long)]
    permutations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest cluster size in the difference and p-value matrices.
    #[arg(long, default_value_t = 5)]
    max_size: usize,
    /// Lower cutoff in hours for the power-law fit.
    #[arg(long, default_value_t = 1.0)]
    tau_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    tz_offset_minutes: Option<i32>,
    /// Directory for the CSV tables.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Prints `report` as JSON or as the given text.
pub fn emit<T: Serialize>(json: bool, report: &T, text: String) {
    if json {
        print!("{}", attnsched_core::io::to_json_pretty(report));
    } else {
        print!("{text}");
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let config: RunConfig = files::read_config(cli.config.as_deref())?;
    match cli.command {
        Command::Estimate(args) => estimate::run(args, config, cli.json),
        Command::Evaluate(args) => evaluate::run(args, cli.json),
        Command::Optimize(args) => optimize::run(args, config, cli.json),
        Command::Simulate(args) => simulate::run(args, config, cli.json),
        Command::Analyze(args) => analyze::run(args, config, cli.json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
