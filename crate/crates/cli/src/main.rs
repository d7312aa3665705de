mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{Format, Sink, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "mublab", version, about = "Construct, validate and extend sets of mutually unbiased bases")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Validation tolerance on unbiasedness and orthonormality defects.
    #[arg(long, global = true, default_value_t = mublab::DEFAULT_TOL)]
    pub tol: f64,
    /// Seed for every random start.
    #[arg(long, global = true, env = "MUBLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Multi-start count for searches.
    #[arg(long, global = true, default_value_t = 1000)]
    pub restarts: usize,
    /// Worker threads, 0 for all cores. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Record wall-clock duration in the manifest.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a set from one of the explicit recipes.
    Construct(ConstructArgs),
    /// Validate a set read from a JSON or text file.
    Verify(FileArgs),
    /// Search for states unbiased to every basis of a set.
    Search(SearchArgs),
    /// Search, then group hits into bases that extend the set.
    Classify(SearchArgs),
    /// Largest summed outcome entropy over pure states.
    Entropy(SearchArgs),
    /// Bloch vectors of every basis state and the complement dimensions.
    Bloch(FileArgs),
    /// Continuous-variable quadrature triples.
    #[command(subcommand)]
    Cv(CvCommand),
    /// Minimal unextendible set sizes for d = 2..7 and 16.
    Table1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Fourier,
    Qr3mod4,
    Qr1mod4,
    WhSet,
    Dim4Triple,
    S6Pair,
    CompleteSet,
}

#[derive(Args, Debug)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// With `fourier`: emit {I, F_d}.
    #[arg(long)]
    pub pair: bool,
    /// With `qr3mod4`/`qr1mod4`: emit {I, F_p, QR_p}.
    #[arg(long)]
    pub triple: bool,
}

#[derive(Args, Debug)]
pub struct FileArgs {
    /// Set file (JSON, or tab-separated text matrices); `-` reads stdin.
    pub file: PathBuf,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub grad_tol: f64,
    #[arg(long, default_value_t = 1e-18)]
    pub hit_threshold: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub dedup_threshold: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub orthogonality_tol: f64,
}

#[derive(Subcommand, Debug)]
pub enum CvCommand {
    /// Both triples completing (q, r q_theta).
    Complete {
        #[arg(long)]
        r: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
    },
    /// Smallest violation of unbiasedness for a fourth quadrature.
    Residual {
        /// Use a completed triple instead of the symmetric one.
        #[arg(long, requires = "theta")]
        r: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "r")]
        theta: Option<f64>,
        #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
        branch: BranchArg,
        #[arg(long, default_value_t = 1000)]
        grid: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

fn main() -> ExitCode {
    let started = Instant::now();
    let cli = Cli::parse();
    let g = cli.global.clone();
    let sink = Sink { format: g.format, out: g.out.clone(), timing: g.timing, started };
    let result = match cli.command {
        Command::Construct(a) => commands::construct(&g, &a),
        Command::Verify(a) => commands::verify(&g, &a),
        Command::Search(a) => commands::search(&g, &a),
        Command::Classify(a) => commands::classify(&g, &a),
        Command::Entropy(a) => commands::entropy(&g, &a),
        Command::Bloch(a) => commands::bloch(&g, &a),
        Command::Cv(c) => commands::cv(&g, &c),
        Command::Table1 => commands::table1(&g),
    };
    let code = result.and_then(|o| sink.emit(o)).unwrap_or_else(|e| {
        eprintln!("mublab: {e}");
        EXIT_USAGE
    });
    ExitCode::from(code)
}
