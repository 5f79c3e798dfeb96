//! `ccx`: command-line front end for the exact construction.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "ccx", version, about = "Exact construction of a Riemann- but not Darboux-integrable function")]
pub struct Cli {
    /// Scheme file prepended to the numbering registry; repeatable, and a
    /// file may hold several schemes separated by `---` lines.
    #[arg(long, global = true)]
    pub registry: Vec<PathBuf>,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Per-machine fuel cap.
    #[arg(long, env = "CCX_MAX_FUEL", global = true)]
    pub max_fuel: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Clone)]
pub struct Pipeline {
    /// Dovetail stages run up front.
    #[arg(long, default_value_t = 2000)]
    pub stages: u64,
    /// Accelerator interval `x@slot` placed before the dovetail; repeatable.
    #[arg(long = "inject")]
    pub injections: Vec<String>,
}

#[derive(Args, Clone)]
pub struct Construction {
    #[command(flatten)]
    pub pipeline: Pipeline,
    /// Extra stages allowed while building rows.
    #[arg(long, default_value_t = 2000)]
    pub search_stages: u64,
    /// Inject covering intervals at witness points instead of waiting for
    /// the dovetail.
    #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
    pub inject_accelerator: bool,
}

#[derive(Subcommand)]
pub enum Command {
    /// Covering intervals from a dovetail run.
    Cover {
        #[command(flatten)]
        pipeline: Pipeline,
    },
    /// The h-sequence built on the covering, with optional coverage searches.
    Hseq {
        #[command(flatten)]
        pipeline: Pipeline,
        /// Largest index to build; defaults to every available index.
        #[arg(long)]
        n: Option<usize>,
        /// Point at which to search for the first `n` with `h_n = 2`; repeatable.
        #[arg(long = "cover-point")]
        cover_points: Vec<String>,
        /// Extra stages per coverage search.
        #[arg(long, default_value_t = 2000)]
        search_stages: u64,
        #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
        inject_accelerator: bool,
    },
    /// Machines whose self-application yields a valid candidate list.
    Enumerate {
        #[command(flatten)]
        pipeline: Pipeline,
    },
    /// Rows of the diagonal construction.
    Diagonal {
        #[command(flatten)]
        construction: Construction,
        #[arg(long, default_value_t = 4)]
        rows: usize,
    },
    /// The partial sum `F_N` as a polygon.
    Build {
        #[command(flatten)]
        construction: Construction,
        #[arg(long)]
        n: usize,
    },
    /// Evaluates a polygon file at rational points.
    Eval {
        #[arg(long)]
        function: PathBuf,
        #[arg(long = "x", required = true)]
        xs: Vec<String>,
    },
    /// Randomized and construction-level verification suites.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
        /// Run the sweep on one thread.
        #[arg(long)]
        sequential: bool,
        #[command(flatten)]
        construction: Construction,
        /// Rows to build for the riemann suite.
        #[arg(long, default_value_t = 4)]
        rows: usize,
        /// Tolerances for the riemann suite; repeatable.
        #[arg(long = "eps")]
        eps: Vec<String>,
    },
    /// Refutes a claimed modulus scheme with an exact certificate.
    Refute {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value_t = 5000)]
        stages: u64,
        #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
        inject_accelerator: bool,
    },
    /// Re-runs a refutation and checks a certificate against it.
    CheckCert {
        #[arg(long)]
        cert: PathBuf,
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value_t = 5000)]
        stages: u64,
        #[arg(long, default_value_t = true, num_args = 0..=1, default_missing_value = "true", action = clap::ArgAction::Set)]
        inject_accelerator: bool,
    },
    /// Decimal `x,y` samples of a polygon for plotting.
    EmitCsv {
        /// Polygon file; when absent, `F_N` is built from the pipeline flags.
        #[arg(long)]
        function: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        construction: Construction,
        #[arg(long, default_value_t = 6)]
        digits: u32,
        /// Extra samples per linear piece.
        #[arg(long, default_value_t = 0)]
        refine: u32,
    },
    /// Runs the invariant suite end to end.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Omega,
    Partition,
    Bump,
    Riemann,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match commands::run(&cli, &argv.join(" ")) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ccx: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
