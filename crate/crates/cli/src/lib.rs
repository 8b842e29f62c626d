//! `spindle` command-line front end.
//!
//! Exit codes: 0 on success, 2 when the invocation or configuration is
//! invalid, 1 when a valid run fails.

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

mod commands;
mod config;

pub use config::ModelFlags;

#[derive(Debug, Parser)]
#[command(
    name = "spindle",
    version,
    about = "Spindle convex hulls of random points in convex discs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo over an n grid: records, moments and incident log.
    Simulate(SimulateArgs),
    /// r-hull of a CSV point set.
    Hull(HullArgs),
    /// Disc-cap area and arc length over a grid of heights.
    Cap(CapArgs),
    /// Variance of the arc-triangle area over a grid of heights.
    Lemma1(Lemma1Args),
    /// Limit constants of a model at radius r.
    Constants(ConstantsArgs),
    /// Power-law exponent of one column of a moments CSV.
    Fit(FitArgs),
}

/// Flags every subcommand accepts.
#[derive(Debug, Args)]
struct Common {
    /// JSON settings file, or a `manifest.json` from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct SimulateArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[command(flatten)]
    #[serde(skip)]
    model: ModelFlags,
    #[arg(long)]
    r: Option<f64>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u64>>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct HullArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[command(flatten)]
    #[serde(skip)]
    model: ModelFlags,
    /// CSV with header `x,y`.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CapArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[command(flatten)]
    #[serde(skip)]
    model: ModelFlags,
    #[arg(long)]
    r: Option<f64>,
    /// Boundary parameter of the cap vertex.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Comma-separated cap heights.
    #[arg(long = "t-grid", value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct Lemma1Args {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[command(flatten)]
    #[serde(skip)]
    model: ModelFlags,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long = "t-grid", value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    /// Draws per height.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct ConstantsArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[command(flatten)]
    #[serde(skip)]
    model: ModelFlags,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct FitArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Moments CSV as written by `simulate`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Column to fit against `n`, e.g. `var_f0`.
    #[arg(long)]
    column: Option<String>,
    /// Weight each point by `(value / se)²` using the matching `se_` column.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    weighted: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Why a run stopped.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags, settings or input; exit code 2.
    Invalid(String),
    /// A valid run that could not finish; exit code 1.
    Runtime(anyhow::Error),
}

impl Failure {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Failure::Invalid(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Invalid(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Invalid(msg) => write!(f, "invalid input: {msg}"),
            Failure::Runtime(e) => write!(f, "run failed: {e:#}"),
        }
    }
}

impl From<spindle::Error> for Failure {
    fn from(e: spindle::Error) -> Self {
        if e.is_validation() {
            Failure::Invalid(e.to_string())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("SPINDLE_LOG", "warn");
    let _ = env_logger::Builder::from_env(env).format_timestamp(None).try_init();
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::Hull(a) => commands::hull(a),
        Command::Cap(a) => commands::cap(a),
        Command::Lemma1(a) => commands::lemma1(a),
        Command::Constants(a) => commands::constants(a),
        Command::Fit(a) => commands::fit(a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("spindle: {f}");
            f.exit_code()
        }
    }
}
