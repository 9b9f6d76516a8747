//! Batch front end for the `mhd-rt` toolkit: critical values, dispersion
//! sweeps, per-mode time evolution and the acceptance suite.
//!
//! Exit codes: `0` success, `1` domain or I/O error, `2` usage error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{CommandFactory, Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod report;
pub mod svg;

use config::{CommonArgs, GridArgs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Domain(#[from] mhd_rt::Error),
    #[error("{0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report has no samples")]
    EmptyReport,
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_DOMAIN,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mhd-rt",
    version,
    about = "Linear stability of magnetic Rayleigh-Taylor interfaces"
)]
#[command(args_override_self = true, subcommand_required = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical field |B|_c and, for a given |B|, the critical frequency
    Critical {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Growth rate over a wavenumber grid: CSV, SVG and optional JSON report
    Dispersion {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "dispersion.csv")]
        csv: PathBuf,
        #[arg(long, default_value = "dispersion.svg")]
        svg: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Time evolution of a single Fourier mode: trajectory CSV and energy plot
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
        /// Wavenumber magnitude
        #[arg(long, default_value_t = 2.0)]
        xi: f64,
        /// Direction of xi in degrees from the x1 axis
        #[arg(long, default_value_t = 0.0)]
        angle: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 5.0)]
        t_end: f64,
        #[arg(long, default_value = "eigenmode")]
        init: commands::Init,
        #[arg(long, default_value = "trajectory.csv")]
        csv: PathBuf,
        #[arg(long, default_value = "energy.svg")]
        svg: PathBuf,
    },
    /// Run the acceptance checks and print one line per criterion
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated criterion numbers; all when omitted
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=10))]
        criteria: Vec<u8>,
    },
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run_command<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match config::expand_config(args, &Cli::command()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match commands::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
