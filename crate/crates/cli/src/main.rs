//! `cilist`: list, check and test the conditional independencies of a
//! causal graph with latent confounders.
//!
//! stdout carries data only; notes and errors go to stderr. Exit codes:
//! 0 success, 1 violation found (`citest`, `dsep`, `verify`), 2 usage
//! error, 3 input error, 4 refused by a size cap or timed out.

mod commands;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use cilist_core::format::{CI_FORMAT_VERSION, GRAPH_FORMAT_VERSION};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cilist", about = "Conditional-independence listing for causal graphs with latent confounders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the non-vacuous statements that suffice to test the graph.
    Listci(ListArgs),
    /// List every d-separation statement (exponential; capped).
    Listgmp(GmpArgs),
    /// List the ordered local Markov statements by brute force (capped).
    Listcibf(BfArgs),
    /// Decide whether Z d-separates X from Y.
    Dsep(DsepArgs),
    /// Project latent nodes out of a graph.
    Project(ProjectArgs),
    /// Sample a random graph.
    Randgen(RandgenArgs),
    /// Run a timing sweep over random graphs.
    Bench(BenchArgs),
    /// Test the listed statements against a CSV data set.
    Citest(CitestArgs),
    /// Cross-check the enumerator against brute force on a small graph.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args, Debug)]
struct GraphArg {
    /// Graph file, text or JSON.
    #[arg(long, short = 'g')]
    graph: PathBuf,
}

#[derive(Args, Debug)]
struct OrderArg {
    /// Comma-separated topological order; defaults to the file's `order`
    /// line, then to a topological sort with ties broken by name.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
}

#[derive(Args, Debug)]
struct ListArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[command(flatten)]
    order: OrderArg,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Print only the number of statements.
    #[arg(long, conflicts_with = "format")]
    count_only: bool,
}

#[derive(Args, Debug)]
struct GmpArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long, conflicts_with = "format")]
    count_only: bool,
    /// Largest node count to attempt [default: 14, or $CILIST_GMP_CAP].
    #[arg(long)]
    cap: Option<usize>,
    /// Run even above the cap.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct BfArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[command(flatten)]
    order: OrderArg,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long, conflicts_with = "format")]
    count_only: bool,
    /// Also print statements with an empty witness set.
    #[arg(long)]
    include_vacuous: bool,
    /// Largest node count to attempt [default: 20, or $CILIST_BF_CAP].
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    force: bool,
}

#[derive(Args, Debug)]
struct DsepArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    y: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    z: Vec<String>,
}

#[derive(Args, Debug)]
struct ProjectArgs {
    #[command(flatten)]
    graph: GraphArg,
    /// Additionally hide this percentage of nodes, chosen at random.
    #[arg(long, requires = "seed")]
    latent_percent: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
#[command(group(clap::ArgGroup::new("density").required(true).args(["pd", "md"])))]
struct RandgenArgs {
    #[arg(long)]
    n: usize,
    /// Probability of each forward directed edge.
    #[arg(long)]
    pd: Option<f64>,
    /// Exact number of directed edges, placed uniformly.
    #[arg(long)]
    md: Option<usize>,
    /// Probability of each bidirected edge.
    #[arg(long)]
    pb: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// JSON grid: {"n": [...], "pd" or "md": [...], "pb": [...], "samples", "seed", "timeout_secs", "threads"}.
    #[arg(long)]
    grid: PathBuf,
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
    /// Overrides the grid's thread count.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct CitestArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    order: OrderArg,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Columns to read as continuous regardless of content.
    #[arg(long, value_delimiter = ',')]
    continuous: Vec<String>,
    /// Columns to read as categorical regardless of content.
    #[arg(long, value_delimiter = ',')]
    categorical: Vec<String>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    graph: GraphArg,
    #[command(flatten)]
    order: OrderArg,
}

/// Why a command stopped; each maps to an exit code.
#[derive(Debug)]
enum Failure {
    /// A negative answer (violation, connected, failed check): exit 1.
    Negative,
    Input(String),
    Cap(String),
    /// stdout was closed by the reader.
    Pipe,
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            Failure::Pipe
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<cilist_core::Error> for Failure {
    fn from(e: cilist_core::Error) -> Self {
        match e {
            cilist_core::Error::CapExceeded { .. } => Failure::Cap(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<cilist_core::ParseError> for Failure {
    fn from(e: cilist_core::ParseError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<cilist_core::citest::CiTestError> for Failure {
    fn from(e: cilist_core::citest::CiTestError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn version() -> String {
    format!("{} (graph format v{GRAPH_FORMAT_VERSION}, CI format v{CI_FORMAT_VERSION})", env!("CARGO_PKG_VERSION"))
}

fn main() -> ExitCode {
    let matches = match Cli::command().version(&*Box::leak(version().into_boxed_str())).try_get_matches() {
        Ok(m) => m,
        Err(e) => e.exit(),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = commands::run(cli.command, &mut out).and_then(|()| out.flush().map_err(Failure::from));
    match result {
        Ok(()) | Err(Failure::Pipe) => ExitCode::SUCCESS,
        Err(Failure::Negative) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("refused: {msg}");
            ExitCode::from(4)
        }
    }
}
