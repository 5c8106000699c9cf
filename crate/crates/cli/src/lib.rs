//! Command-line front end: argument parsing, input loading, report emission.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;
pub mod selftest;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use reeb_fuller::Error;

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MALFORMED: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "REEB_FULLER_THREADS";

#[derive(Debug, Parser)]
#[command(name = "reeb-fuller", version, about = "Closed-orbit invariants of Reeb and geodesic flows")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Directory for SVG plots.
    #[arg(long, global = true)]
    pub plot: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seeds: Option<usize>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub tol_orbit: Option<f64>,
    #[arg(long, global = true)]
    pub tol_match: Option<f64>,
    #[arg(long, global = true)]
    pub degeneracy_tol: Option<f64>,
    #[arg(long, global = true)]
    pub rng_seed: Option<u64>,
    /// Escape radius for continuation.
    #[arg(long = "escape-window", global = true)]
    pub escape_window: Option<f64>,
    #[arg(long, global = true)]
    pub period_cap: Option<f64>,
}

/// Which closed orbits to look for.
#[derive(Debug, Args, Clone)]
pub struct TargetArgs {
    /// Homotopy class, e.g. `1,0` (a third entry gives the fiber winding on contact charts).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub class: Option<Vec<i64>>,
    /// Period window `min,max` for simply connected models.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub window: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed orbit search.
    Orbits {
        #[command(subcommand)]
        cmd: OrbitsCmd,
    },
    /// Fixed-point, Fuller and Conley–Zehnder indices.
    Index {
        #[command(subcommand)]
        cmd: IndexCmd,
    },
    /// Track orbits along a one-parameter family.
    Continue(TrackArgs),
    /// Sky-catastrophe verdicts along a family.
    Sky(TrackArgs),
    /// Fixed strings of an isometry and the GWF count.
    Gwf(GwfArgs),
    /// Scan for fixed strings of an irrational translation of the flat torus.
    Counterexample(CounterexampleArgs),
    /// Fixed battery of checks with a deterministic report.
    Selftest,
}

#[derive(Debug, Subcommand)]
pub enum OrbitsCmd {
    Find {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum IndexCmd {
    Fuller {
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        target: TargetArgs,
        /// Aggregate degenerate circle families by their Euler characteristic.
        #[arg(long)]
        morse_bott: bool,
    },
    Cz {
        /// CZ of the rotation path `exp(2πθ t J₀)`.
        #[arg(long, allow_hyphen_values = true)]
        rotation: Option<f64>,
        /// CZ of the hyperbolic path `diag(e^{λt}, e^{−λt})`.
        #[arg(long, allow_hyphen_values = true)]
        hyperbolic: Option<f64>,
        /// CZ of every orbit found on a model.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        target: TargetArgs,
    },
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    /// Family description (JSON).
    #[arg(long)]
    pub family: PathBuf,
    /// Endpoint the tracks start from.
    #[arg(long, default_value_t = 0.0)]
    pub from: f64,
    /// Start orbit file (a closed orbit or an `orbits find` report).
    #[arg(long)]
    pub orbit: Option<PathBuf>,
    #[command(flatten)]
    pub target: TargetArgs,
}

#[derive(Debug, Args)]
pub struct GwfArgs {
    /// Torus metric description.
    #[arg(long)]
    pub metric: PathBuf,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0,0")]
    pub shift: Vec<f64>,
    /// Linear part `a11,a12,a21,a22` of the isometry.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub linear: Option<Vec<i64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub class: Vec<i64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub charge: Vec<u32>,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    pub charges: Vec<u32>,
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

/// Exit code and kind tag for a library error.
pub fn classify(e: &Error) -> (i32, &'static str) {
    match e {
        Error::Parse(_) => (EXIT_MALFORMED, "parse"),
        Error::InvalidMetric(_) => (EXIT_MALFORMED, "invalid_metric"),
        Error::DegenerateModel(_) => (EXIT_MALFORMED, "degenerate_model"),
        Error::StrictnessViolation { .. } => (EXIT_MALFORMED, "strictness_violation"),
        Error::NotAnIsometry { .. } => (EXIT_MALFORMED, "not_an_isometry"),
        Error::Degenerate { .. } => (EXIT_DEGENERATE, "degenerate_orbit"),
        Error::Frame(_) => (EXIT_FAILURE, "frame"),
        Error::Precision { .. } => (EXIT_FAILURE, "precision"),
        Error::Stall { .. } => (EXIT_FAILURE, "stall"),
        Error::InvarianceNotApplicable { .. } => (EXIT_FAILURE, "invariance_not_applicable"),
        Error::UnsupportedTopology(_) => (EXIT_FAILURE, "unsupported_topology"),
        Error::MismatchedModels(..) => (EXIT_FAILURE, "mismatched_models"),
        Error::InvalidInput(_) => (EXIT_MALFORMED, "invalid_input"),
    }
}

fn write_error(stderr: &mut dyn Write, kind: &str, message: String, code: i32) -> i32 {
    let body = ErrorReport { error: ErrorBody { kind, message, exit_code: code } };
    let _ = stderr.write_all(&output::to_json(&body));
    code
}

fn install_thread_cap() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
            if code == EXIT_OK {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            return write_error(stderr, "usage", e.to_string(), code);
        }
    };
    install_thread_cap();
    match commands::execute(&cli) {
        Ok(out) => {
            if let Some(path) = &cli.global.out {
                if let Err(e) = std::fs::write(path, &out.report) {
                    return write_error(stderr, "io", format!("{}: {e}", path.display()), EXIT_FAILURE);
                }
            } else if stdout.write_all(&out.report).is_err() {
                return EXIT_FAILURE;
            }
            out.exit_code
        }
        Err(commands::CliError::Core(e)) => {
            let (code, kind) = classify(&e);
            write_error(stderr, kind, e.to_string(), code)
        }
        Err(commands::CliError::Io(path, e)) => write_error(stderr, "io", format!("{path}: {e}"), EXIT_MALFORMED),
    }
}
