//! `hcf`: routing, monotonicity analysis, theorem sweeps, and conjecture
//! searches on the directed hypercube.
//!
//! Exit codes: 0 on success, 2 on configuration or parse errors, 3 when a
//! proven statement fails on a concrete instance (a solver-bug signal).

mod commands;
mod render;

use std::env;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hcf_core::Error;

#[derive(Parser)]
#[command(name = "hcf", about = "Directed-hypercube routing and isoperimetry toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Route a matched pair along vertex-disjoint monotone paths.
    LrRoute(RouteArgs),
    /// Route a matched pair twice, with an edge-disjoint union.
    #[command(name = "lr-route2")]
    LrRoute2(RouteArgs),
    /// Compute the monotonicity-gap quantities of a Boolean function.
    AnalyzeFn(AnalyzeArgs),
    /// Sweep the proven flow bounds over vertex subsets.
    CheckTheorems(SweepArgs),
    /// Search a conjecture for counterexamples.
    Search(SearchArgs),
    /// Verify a stored report's witness and re-emit it.
    EmitReport(EmitArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the document to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RouteArgs {
    /// Matched pair JSON ({"d":…,"S":…,"T":…,"phi":…}): a file path or
    /// the document itself.
    pair: String,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Truth table ("0110…" or "0x…"): a file path or the literal itself.
    function: String,
    /// Seed for the local-search coloring fallback on large edge sets.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Cube dimension.
    #[arg(long)]
    d: usize,
    /// Check every proper nonempty subset (needs d <= 3).
    #[arg(long, conflicts_with = "budget")]
    exhaustive: bool,
    /// Number of random instances when sampling.
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    /// Random generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConjectureName {
    /// r collections of vertex-disjoint paths on level matched pairs.
    Glr,
    /// Square vertex capacities carry dirvol-many units out of a set.
    Rout,
}

#[derive(Args)]
struct SearchArgs {
    /// Conjecture to search.
    #[arg(value_enum)]
    conjecture: ConjectureName,
    /// Cube dimension.
    #[arg(long)]
    d: usize,
    /// Enumerate every instance instead of sampling.
    #[arg(long, conflicts_with = "budget")]
    exhaustive: bool,
    /// Number of random instances when sampling.
    #[arg(long, default_value_t = 1000)]
    budget: u64,
    /// Random generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cap on |S| for level-pair enumeration.
    #[arg(long, default_value_t = 6)]
    max_size: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct EmitArgs {
    /// Report JSON: a file path or the document itself.
    report: String,
    #[command(flatten)]
    output: OutputArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match cli.command {
        Command::LrRoute(args) => commands::lr_route(&args, false),
        Command::LrRoute2(args) => commands::lr_route(&args, true),
        Command::AnalyzeFn(args) => commands::analyze_fn(&args),
        Command::CheckTheorems(args) => commands::check_theorems(&args),
        Command::Search(args) => commands::search(&args),
        Command::EmitReport(args) => commands::emit_report(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::TheoremViolation { .. } | Error::SplitFailure { .. } => 3,
        _ => 2,
    }
}

/// `HCF_THREADS` caps the rayon worker count for the whole process.
fn configure_threads() -> Result<(), Error> {
    let raw = match env::var("HCF_THREADS") {
        Err(env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(Error::Config(format!("HCF_THREADS: {e}"))),
        Ok(raw) => raw,
    };
    let workers: usize = raw
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| {
            Error::Config(format!("HCF_THREADS must be a positive integer, got {raw:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}
