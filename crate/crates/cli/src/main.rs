mod batch;
mod io;
mod solve;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use polyval::discounted::Fault;
use polyval::weight::Rational;
use polyval::RealizeStrategy;

#[derive(Parser)]
#[command(name = "polyval", version, about = "Exact polyhedral value iteration for discounted, energy and mean-payoff games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one game; the solver follows the game's kind.
    Solve(SolveArgs),
    /// Decide which nodes have mean-payoff value at least a threshold.
    DecideMp {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, value_parser = parse_rational)]
        threshold: Rational,
    },
    /// Run solvers and brute-force oracles side by side.
    Verify(VerifyArgs),
    /// Emit generated games.
    Gen(GenArgs),
    /// Per-n iteration counts and bound ratios, optionally timed.
    Bench(BenchArgs),
    /// Per-instance iteration counts and bound ratios.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Realize {
    Pass,
    Vertex,
    Auto,
    /// Every strategy, in verify only.
    Both,
}

impl Realize {
    fn strategies(self) -> Vec<RealizeStrategy> {
        match self {
            Realize::Pass => vec![RealizeStrategy::PassThrough],
            Realize::Vertex => vec![RealizeStrategy::ExactVertex],
            Realize::Auto => vec![RealizeStrategy::Auto],
            Realize::Both => vec![RealizeStrategy::PassThrough, RealizeStrategy::ExactVertex],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    Flip,
}

/// Solver switches shared by every command that runs a solver.
#[derive(Args, Clone, Debug)]
struct SolverFlags {
    #[arg(long, value_enum, default_value = "off")]
    monitor: Switch,
    #[arg(long, value_enum, default_value = "auto")]
    realize: Realize,
    #[arg(long = "fast-int", value_enum, default_value = "off")]
    fast_int: Switch,
    #[arg(long, value_enum, hide = true)]
    fault: Option<FaultArg>,
}

impl SolverFlags {
    fn fault(&self) -> Fault {
        match self.fault {
            Some(FaultArg::Flip) => Fault::FlipComparison,
            None => Fault::None,
        }
    }
}

#[derive(Args, Clone, Debug)]
struct SolveArgs {
    #[arg(long = "in", default_value = "-")]
    input: String,
    #[arg(long, default_value = "-")]
    out: String,
    #[command(flatten)]
    flags: SolverFlags,
    /// Include the reduction certificate in energy output.
    #[arg(long)]
    certificate: bool,
    /// Write a run record (digests, options, iterations, wall time) here.
    #[arg(long)]
    record: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Discounted,
    Energy,
    Mpd,
}

/// Describes a batch of games: seeded random ones, or every game of a
/// bounded shape.
#[derive(Args, Clone, Debug)]
struct SourceArgs {
    #[arg(long, value_enum, default_value = "energy")]
    kind: KindArg,
    #[arg(long, value_parser = parse_rational, default_value = "1/2")]
    lambda: Rational,
    #[arg(long, value_parser = parse_rational, default_value = "0")]
    threshold: Rational,
    #[arg(long = "n-min", default_value_t = 1)]
    n_min: usize,
    #[arg(long = "n-max", default_value_t = 4)]
    n_max: usize,
    #[arg(long = "min-degree", default_value_t = 1)]
    min_degree: usize,
    #[arg(long = "max-degree", default_value_t = 2)]
    max_degree: usize,
    /// Comma-separated list (`-1,0,1/2`) or integer range (`-10..10`).
    #[arg(long, default_value = "-1,0,1", allow_hyphen_values = true)]
    weights: String,
    /// Largest denominator for range weights.
    #[arg(long = "max-den", default_value_t = 1)]
    max_den: u64,
    #[arg(long)]
    bipartite: bool,
    /// Random games per node count.
    #[arg(long, default_value_t = 10)]
    count: u64,
    /// Every game of the shape instead of random ones (list weights only).
    #[arg(long)]
    exhaustive: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Read games from a file or a directory of `*.json` files instead.
    #[arg(long = "in")]
    input: Option<String>,
}

#[derive(Args, Clone, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value = "off")]
    monitor: Switch,
    #[arg(long, value_enum, default_value = "both")]
    realize: Realize,
    #[arg(long, value_enum, hide = true)]
    fault: Option<FaultArg>,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "-")]
    out: String,
    /// Omit the per-instance verdict list.
    #[arg(long)]
    summary: bool,
}

#[derive(Args, Clone, Debug)]
struct GenArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// `-` for one game per line on stdout, otherwise a directory.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args, Clone, Debug)]
struct BenchArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    flags: SolverFlags,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "-")]
    out: String,
    /// Add wall-time columns (makes the output run-dependent).
    #[arg(long, value_enum, default_value = "off")]
    timing: Switch,
}

#[derive(Args, Clone, Debug)]
struct StatsArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    flags: SolverFlags,
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value = "-")]
    out: String,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    let t = s.trim();
    if t.split('/').nth(1).is_some_and(|d| d.trim_start_matches(['+', '-']).chars().all(|c| c == '0')) {
        return Err(format!("{s:?}: zero denominator"));
    }
    t.parse::<Rational>().map_err(|e| format!("{s:?}: {e}"))
}

/// How a command failed; each class has its own exit code.
#[derive(Debug)]
enum Failure {
    /// Bad arguments or an invalid game.
    Input(String),
    /// Solver and oracle disagree somewhere in a batch.
    Mismatch(String),
    /// A solver invariant broke; the message names the trace dump.
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Mismatch(m) | Failure::Internal(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => solve::run(&args, None),
        Command::DecideMp { solve: args, threshold } => solve::run(&args, Some(threshold)),
        Command::Verify(args) => batch::verify(&args),
        Command::Gen(args) => batch::generate(&args),
        Command::Bench(args) => batch::bench(&args),
        Command::Stats(args) => batch::stats(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("polyval: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
