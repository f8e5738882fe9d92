mod commands;
mod inputs;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use polyext::{DEFAULT_COMPANION_CAP, DEFAULT_ENUMERATION_CAP};

use crate::report::{CliError, RunReport};

pub const DEFAULT_SEED: u64 = 20240611;

#[derive(Parser, Debug)]
#[command(name = "polyext", version, about = "Extreme contractions between polyhedral spaces")]
struct Cli {
    /// Print a prose summary instead of the JSON report.
    #[arg(long, global = true)]
    human: bool,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Seed for randomized checks.
    #[arg(long, global = true, env = "POLYEXT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build or inspect a polyhedral space.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Analyse a single operator.
    #[command(subcommand)]
    Op(OpCmd),
    /// Enumerate extreme contractions between two spaces.
    #[command(subcommand)]
    Enumerate(EnumerateCmd),
    /// Write an operator as a convex combination of extreme contractions.
    #[command(subcommand)]
    Decompose(DecomposeCmd),
    /// Companion matrices at a vertex.
    #[command(subcommand)]
    Companion(CompanionCmd),
    /// Decide `A x = b, x >= 0` with a certificate.
    Farkas {
        /// JSON file `{"a": [[...]], "b": [...]}`.
        file: PathBuf,
    },
    /// Complex rank-one operators from linf^n to l1^n.
    #[command(subcommand)]
    Linfl1(Linfl1Cmd),
    /// Reproduce the reference instances.
    Selftest,
}

#[derive(Subcommand, Debug)]
enum SpaceCmd {
    /// Validate a vertex list and compute its facets.
    Build {
        file: PathBuf,
        /// Write the canonical space file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show vertices, facets and incidences of a named or stored space.
    Inspect { space: String },
}

#[derive(Subcommand, Debug)]
enum OpCmd {
    Norm { file: PathBuf },
    Attain { file: PathBuf },
    Rank { file: PathBuf },
    CheckExtreme { file: PathBuf },
    ExtremalNumber { file: PathBuf },
}

#[derive(Subcommand, Debug)]
enum EnumerateCmd {
    /// Rank-one extreme contractions from facet and vertex pairs.
    Rank1 { domain: String, codomain: String },
    /// All vertices of the operator ball.
    All {
        domain: String,
        codomain: String,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
}

#[derive(Subcommand, Debug)]
enum DecomposeCmd {
    /// Rank-one decomposition through facet maps at a norming vertex.
    Km {
        file: PathBuf,
        /// Start at this domain vertex index.
        #[arg(long)]
        vertex: Option<usize>,
        /// Use n-subsets of the facets through the vertex one at a time.
        #[arg(long)]
        subsets: bool,
    },
    /// Decomposition over all enumerated extreme contractions.
    General {
        file: PathBuf,
        /// Only use extreme contractions of this rank.
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CompanionCmd {
    /// All companion matrices at a vertex for a fixed image vertex.
    Enumerate {
        domain: String,
        codomain: String,
        /// Domain vertex, e.g. `1,1`.
        #[arg(long, allow_hyphen_values = true)]
        vertex: String,
        /// Codomain vertex, e.g. `1,0`.
        #[arg(long, allow_hyphen_values = true)]
        image: String,
        #[arg(long, default_value_t = DEFAULT_COMPANION_CAP)]
        cap: usize,
    },
    /// Decide the sign hypothesis for a matrix given as `1,1;1,-1`.
    Check {
        #[arg(long, allow_hyphen_values = true)]
        matrix: String,
    },
}

#[derive(Subcommand, Debug)]
enum Linfl1Cmd {
    /// κ-profile and classification.
    Check { file: PathBuf },
    /// Split into extreme contractions.
    Decompose { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let echo: Vec<String> = std::env::args().skip(1).collect();
    let start = Instant::now();
    let result = commands::run(&cli);
    let elapsed = start.elapsed();
    match result {
        Ok(out) => {
            let code = out.exit_code();
            let report = RunReport::new(echo, out, cli.timing.then_some(elapsed));
            if cli.human {
                println!("{}", report.human());
            } else {
                println!("{}", report.to_json());
            }
            ExitCode::from(code)
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}

pub(crate) type CliResult<T> = std::result::Result<T, CliError>;
