//! `pgg`: solve, analyse and construct binary public goods games from the
//! command line. Every run prints one JSON report on stdout; human-readable
//! summaries and warnings go to stderr.

mod commands;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "pgg", version, about = "Pure Nash equilibria of binary public goods games on graphs")]
struct Cli {
    /// Worker threads for parallel enumeration and verification (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether a game has a pure Nash equilibrium.
    Solve(SolveArgs),
    /// Run better-response dynamics from a start profile.
    Dynamics(DynamicsArgs),
    /// Place a best-response pattern in the complexity table.
    Classify(ClassifyArgs),
    /// Build a gadget and optionally verify its contract.
    Gadget(GadgetArgs),
    /// Compile a POSITIVE-1IN3-SAT instance to a picky-pattern game.
    Reduce(ReduceArgs),
    /// Check that an assignment lifts to an equilibrium of a compiled game.
    Certify(CertifyArgs),
    /// Convert a threshold game to a weighted public goods game.
    Threshold(ThresholdArgs),
    /// Cross-check a decreasing-pattern game against its congestion game.
    Congestion(CongestionArgs),
    /// Generate a seeded random game.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Brute,
    Backtrack,
}

#[derive(Debug, Args)]
struct SolveArgs {
    file: PathBuf,
    /// List every equilibrium (exhaustive, at most 30 vertices).
    #[arg(long)]
    enumerate: bool,
    /// Stop enumeration after this many equilibria.
    #[arg(long, value_name = "N", requires = "enumerate")]
    max_count: Option<usize>,
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    method: Method,
    /// Write the CNF encoding in DIMACS format.
    #[arg(long, value_name = "PATH")]
    cnf_out: Option<PathBuf>,
    /// Node budget for the backtracking solver.
    #[arg(long, value_name = "N", default_value_t = pgg_core::solver::DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Init {
    All0,
    All1,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleArg {
    Roundrobin,
    Random,
    First,
}

#[derive(Debug, Args)]
struct DynamicsArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Init::All0)]
    init: Init,
    #[arg(long, value_enum, default_value_t = ScheduleArg::Roundrobin)]
    schedule: ScheduleArg,
    /// Seeds the random start profile; the random schedule uses seed + 1.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flip limit. Defaults to the potential bound for decreasing patterns
    /// and to one million otherwise.
    #[arg(long, value_name = "M")]
    max_steps: Option<u64>,
    /// Include every flip and the potential after each flip.
    #[arg(long)]
    trace: bool,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Pattern such as `110*` or `1(01)*`.
    pattern: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyArg {
    Exact,
    Compositional,
}

#[derive(Debug, Args)]
struct GadgetArgs {
    /// near-or, true, false, equiv or clause.
    name: String,
    #[arg(long)]
    k: u64,
    /// Operand count; only NEAR-OR accepts a value other than its default.
    #[arg(long, value_name = "L")]
    arity: Option<usize>,
    #[arg(long, value_enum)]
    verify: Option<VerifyArg>,
    /// Write the gadget as a game file with role comments.
    #[arg(long, value_name = "PATH")]
    emit: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    satfile: PathBuf,
    #[arg(long)]
    k: u64,
    #[arg(short, long, value_name = "OUT")]
    output: PathBuf,
    /// Write the reduction certificate as JSON.
    #[arg(long, value_name = "JSON")]
    cert: Option<PathBuf>,
    /// Link consecutive occurrences of a variable instead of all pairs.
    #[arg(long)]
    equiv_chain: bool,
}

#[derive(Debug, Args)]
struct CertifyArgs {
    game: PathBuf,
    #[arg(long, value_name = "JSON")]
    cert: PathBuf,
    /// One bit per variable, e.g. `100`.
    #[arg(long, value_name = "BITS")]
    assignment: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KRuleArg {
    Floor,
    FloorPlusOne,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    file: PathBuf,
    #[arg(short, long, value_name = "OUT")]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = KRuleArg::FloorPlusOne)]
    k_rule: KRuleArg,
}

#[derive(Debug, Args)]
struct CongestionArgs {
    file: PathBuf,
    /// Random profiles checked when the game is too large for exhaustive checking.
    #[arg(long, value_name = "N", default_value_t = 1000)]
    check_samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Check every profile when the game has at most this many vertices.
    #[arg(long, value_name = "N", default_value_t = 16)]
    exhaustive_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelArg {
    Gnp,
    CompleteWeighted,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    n: usize,
    /// Edge probability for `gnp`, as `p/q`, an integer or a decimal.
    #[arg(long, default_value = "1/2")]
    p: String,
    /// Largest edge weight for `complete-weighted`.
    #[arg(long, default_value_t = 1)]
    wmax: u64,
    /// Vertex pattern; repeat to draw each vertex's pattern from a list.
    #[arg(long = "pattern", value_name = "PATTERN", default_value = "10*")]
    patterns: Vec<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long, value_name = "OUT")]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let built = if threads == 0 {
            Err("--threads must be at least 1".to_string())
        } else {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
        };
        if let Err(msg) = built {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    }

    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Solve(a) => commands::solve(a),
        Command::Dynamics(a) => commands::dynamics(a),
        Command::Classify(a) => commands::classify(a),
        Command::Gadget(a) => commands::gadget(a),
        Command::Reduce(a) => commands::reduce(a),
        Command::Certify(a) => commands::certify(a),
        Command::Threshold(a) => commands::threshold(a),
        Command::Congestion(a) => commands::congestion(a),
        Command::Gen(a) => commands::gen(a),
    };
    match outcome {
        Ok(outcome) => {
            let status = outcome.failure.as_ref().map_or(0, CliError::exit_code);
            report::emit(&argv[1..], outcome, start.elapsed());
            ExitCode::from(status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
