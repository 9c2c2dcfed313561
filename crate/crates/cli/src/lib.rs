//! Library side of the `parashoot` binary: configuration, commands and artifact writers.
//!
//! `main.rs` only parses arguments and maps [`run`]'s result to a process exit code.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub mod commands;
pub mod config;
pub mod output;
pub mod scan;
pub mod validate;

pub use config::{Loaded, Overrides, RunConfig};

/// Process exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exit {
    Success = 0,
    HardError = 1,
    ConfigError = 2,
    NotConverged = 3,
}

impl Exit {
    pub fn code(self) -> u8 {
        self as u8
    }
}

/// A failure carried to the process boundary and reported as JSON.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    #[serde(skip)]
    pub exit: Exit,
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn config(code: &str, message: String) -> Self {
        CliError { exit: Exit::ConfigError, code: code.into(), message }
    }

    pub fn hard(code: &str, message: String) -> Self {
        CliError { exit: Exit::HardError, code: code.into(), message }
    }

    /// A core error raised while validating the configuration.
    pub fn from_config(e: parashoot_core::Error) -> Self {
        CliError::config(e.code(), e.to_string())
    }

    /// A core error raised during a computation.
    pub fn hard_core(e: parashoot_core::Error) -> Self {
        CliError::hard(e.code(), e.to_string())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::hard("io", format!("{}: {e}", path.display()))
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a CliError,
            exit: u8,
            version: &'a str,
        }
        serde_json::to_string(&Report { error: self, exit: self.exit.code(), version: output::VERSION })
            .expect("error report serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for CliError {}

/// What a successful command run reports back to `main`.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit: Exit,
    /// One-line human summary for stdout.
    pub message: String,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Parser)]
#[command(name = "parashoot", version, about = "Zero-energy scattering orbits of the planar N-centre problem")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output directory; PARASHOOT_OUT takes precedence.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for batch commands (default: number of processors).
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Seed for the randomized minimization restarts.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Minimizer gradient tolerance.
    #[arg(long, value_name = "FLOAT")]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed-endpoint problem at one radius.
    SolveBolza {
        #[command(flatten)]
        common: Common,
        /// Endpoint radius (default: first continuation radius).
        #[arg(long, value_name = "FLOAT")]
        radius: Option<f64>,
    },
    /// Continuation in the endpoint radius plus asymptotic fits.
    SolveEntire {
        #[command(flatten)]
        common: Common,
    },
    /// Every unordered partition against a grid of direction pairs.
    Scan {
        #[command(flatten)]
        common: Common,
    },
    /// Collapsing-centres deviation table.
    Collapse {
        #[command(flatten)]
        common: Common,
    },
    /// Angle spanned by the single-centre parabolic orbit.
    KeplerAngle {
        #[command(flatten)]
        common: Common,
    },
    /// Runs the invariant suites on the configured problem.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Renders a trajectory CSV as SVG.
    Plot {
        #[command(flatten)]
        common: Common,
        /// Trajectory CSV written by another command.
        input: PathBuf,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::SolveBolza { common, .. }
            | Command::SolveEntire { common }
            | Command::Scan { common }
            | Command::Collapse { common }
            | Command::KeplerAngle { common }
            | Command::Validate { common }
            | Command::Plot { common, .. } => common,
        }
    }
}

/// Loads the configuration and runs the command. `env_out` is the value of `PARASHOOT_OUT`.
pub fn run(command: &Command, env_out: Option<PathBuf>) -> Result<Outcome, CliError> {
    let common = command.common();
    let radius = match command {
        Command::SolveBolza { radius, .. } => *radius,
        _ => None,
    };
    let ov = Overrides { out: env_out.or_else(|| common.out.clone()), seed: common.seed, tol: common.tol, radius };
    let loaded = config::load(&common.config, &ov)?;
    match command {
        Command::SolveBolza { .. } => commands::solve_bolza(&loaded),
        Command::SolveEntire { .. } => commands::solve_entire(&loaded),
        Command::Scan { .. } => scan::run_scan(&loaded, common.jobs),
        Command::Collapse { .. } => commands::collapse(&loaded),
        Command::KeplerAngle { .. } => commands::kepler_angle(&loaded),
        Command::Validate { .. } => validate::run_validate(&loaded),
        Command::Plot { input, .. } => commands::plot(&loaded, input),
    }
}
