//! Command-line front end for `subcover`.
//!
//! [`run`] parses arguments, executes one subcommand and returns the process
//! exit code: 0 success, 1 negative verdict, 2 usage or input error,
//! 3 computation error.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
pub mod input;
pub mod output;

pub use input::InputError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

/// Environment variable overriding the worker count.
pub const WORKERS_ENV: &str = "SUBCOVER_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(name = "subcover", version, about = "Spectra of periodic graphs and their rolled-up subcoverings")]
pub struct Cli {
    #[command(flatten)]
    pub run: RunArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Grid samples per axis; one value for all axes or one per axis
    #[arg(long, global = true, value_delimiter = ',', default_value = "64")]
    pub grid: Vec<usize>,
    /// Band-edge refinement tolerance
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub refine: f64,
    /// Bands narrower than this are reported as flat
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub flat_tol: f64,
    /// Finite-difference step for Hessians (radians)
    #[arg(long, global = true, default_value_t = subcover::asymptotics::DEFAULT_STEP)]
    pub step: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads (0 = one per core)
    #[arg(long, global = true, env = WORKERS_ENV, default_value_t = 0)]
    pub workers: usize,
    /// Random seed for sampling subcommands
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether the rows of T form a primitive set
    CheckPrimitive {
        /// Chiral matrix, rows separated by ';' and entries by ','
        #[arg(allow_hyphen_values = true)]
        chiral: String,
    },
    /// Complete a primitive T to a unimodular basis
    Complete {
        #[arg(allow_hyphen_values = true)]
        chiral: String,
    },
    /// Band ranges and spectrum of a periodic graph
    Bands { graph: PathBuf },
    /// Band edges with their extremal quasimomenta
    Edges { graph: PathBuf },
    /// Band ranges of the subcovering defined by T
    SubEdges {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        chiral: String,
    },
    /// Write the fundamental graph of the subcovering
    Quotient {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        chiral: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Asymptotic band edge of the subcovering at an extremum k0
    Asymptotics {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        chiral: String,
        /// 1-based band index
        #[arg(long)]
        band: usize,
        #[arg(long)]
        side: subcover::spectrum::Side,
        /// Extremum as rationals in units of π, e.g. "2/3,-2/3"
        #[arg(long, allow_hyphen_values = true)]
        k0: String,
        /// Also compute the subcovering edge numerically
        #[arg(long)]
        numeric: bool,
    },
    /// Exact isospectrality verdict from band-edge level sets
    Isospectral {
        graph: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        chiral: String,
        #[arg(long)]
        level_sets: PathBuf,
        /// Also compare subcovering and base edges numerically
        #[arg(long)]
        numeric: bool,
    },
    /// Sample all band functions on the grid and write them as CSV
    ExportDispersion {
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check Floquet invariants at random quasimomenta
    PropertyCheck {
        graph: PathBuf,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

/// Validated run settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid: Vec<usize>,
    pub refine: f64,
    pub flat_tol: f64,
    pub step: f64,
    pub format: Format,
    pub workers: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn from_args(a: &RunArgs) -> Result<Self, CliError> {
        for (name, v) in [("refine", a.refine), ("flat-tol", a.flat_tol), ("step", a.step)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Usage(format!("--{name} must be a positive number")));
            }
        }
        if a.grid.is_empty() || a.grid.iter().any(|&n| n < 2) {
            return Err(CliError::Usage("--grid counts must be at least 2".into()));
        }
        Ok(RunConfig {
            grid: a.grid.clone(),
            refine: a.refine,
            flat_tol: a.flat_tol,
            step: a.step,
            format: a.format,
            workers: a.workers,
            seed: a.seed,
        })
    }

    pub fn edge_config(&self) -> subcover::spectrum::EdgeConfig {
        subcover::spectrum::EdgeConfig {
            grid: self.grid.clone(),
            refine: self.refine,
            ..Default::default()
        }
    }

    /// Per-axis counts for a `dim`-dimensional zone.
    pub fn counts(&self, dim: usize) -> Result<Vec<usize>, CliError> {
        match self.grid.len() {
            1 => Ok(vec![self.grid[0]; dim]),
            n if n == dim => Ok(self.grid.clone()),
            n => Err(CliError::Usage(format!("--grid has {n} counts for a {dim}-dimensional zone"))),
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(InputError),
    Compute(subcover::Error),
    Io(std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Input(e) => write!(f, "{e}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<InputError> for CliError {
    fn from(e: InputError) -> Self {
        CliError::Input(e)
    }
}

impl From<subcover::Error> for CliError {
    fn from(e: subcover::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use subcover::Error as E;
        match self {
            CliError::Usage(_) | CliError::Input(_) => EXIT_USAGE,
            CliError::Compute(E::NotPrimitive { .. }) => EXIT_NEGATIVE,
            CliError::Compute(E::WrongShape(_) | E::InvalidInput(_)) => EXIT_USAGE,
            CliError::Compute(_) | CliError::Io(_) => EXIT_COMPUTE,
        }
    }

    pub fn kind(&self) -> &'static str {
        use subcover::Error as E;
        match self {
            CliError::Usage(_) => "usage",
            CliError::Input(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::Compute(e) => match e {
                E::Overflow => "overflow",
                E::RankDeficient => "rank_deficient",
                E::NotPrimitive { .. } => "not_primitive",
                E::NotHermitian { .. } => "not_hermitian",
                E::NotPositiveDefinite { .. } => "not_positive_definite",
                E::GridTooLarge { .. } => "grid_too_large",
                E::BandTouching { .. } => "band_touching",
                E::EmptyLevelSet { .. } => "empty_level_set",
                E::WrongShape(_) => "wrong_shape",
                E::InvalidInput(_) => "invalid_input",
            },
        }
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

fn report_error(err: &mut dyn Write, e: &CliError, json: bool) {
    let code = e.exit_code();
    // a failed write to stderr leaves nothing better to do
    let _ = if json {
        output::json(err, &ErrorRecord { error: e.kind(), message: e.to_string(), exit_code: code })
    } else {
        writeln!(err, "error: {e}")
    };
}

/// Runs one command line and returns its exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let json = cli.run.format == Format::Json;
    let cfg = match RunConfig::from_args(&cli.run) {
        Ok(c) => c,
        Err(e) => {
            report_error(err, &e, json);
            return e.exit_code();
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build() {
        Ok(p) => p,
        Err(e) => {
            let e = CliError::Usage(format!("cannot start {} workers: {e}", cfg.workers));
            report_error(err, &e, json);
            return e.exit_code();
        }
    };
    // the pool requires Send, so buffer both streams and copy afterwards
    let (mut obuf, mut ebuf) = (Vec::new(), Vec::new());
    let result = pool.install(|| commands::dispatch(&cli.command, &cfg, &mut obuf, &mut ebuf));
    let copied = out.write_all(&obuf).and_then(|_| err.write_all(&ebuf));
    match result.and_then(|code| copied.map(|_| code).map_err(CliError::Io)) {
        Ok(code) => code,
        Err(e) => {
            report_error(err, &e, json);
            e.exit_code()
        }
    }
}
