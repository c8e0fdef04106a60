//! `blowup`: runs the profile experiments and writes columnar data for
//! external plotting.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
//! 4 I/O error. On failure a JSON error record is printed to stderr.

mod config;
mod modes;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Format, Overrides};
use output::Sink;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }
}

impl From<blowup::Error> for CliError {
    fn from(e: blowup::Error) -> Self {
        use blowup::Error as E;
        match e {
            E::Domain(_) | E::Precondition(_) => CliError::Config(e.to_string()),
            E::InvalidBracket(_) | E::Undetermined(_) | E::Overflow(_) | E::OutOfSpan { .. } => {
                CliError::Numeric(e.to_string())
            }
        }
    }
}

#[derive(Parser)]
#[command(version, about = "Self-similar blow-up profiles of u_t = Δu^m + u^p")]
struct Cli {
    #[command(subcommand)]
    mode: Mode,
    /// TOML file with parameters and knobs; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Diffusion exponent m > 1
    #[arg(long, global = true)]
    m: Option<f64>,
    /// Space dimension N ≥ 3
    #[arg(long = "N", global = true)]
    dim: Option<f64>,
    /// Reaction exponent p > m
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Shooting parameters, comma separated
    #[arg(long = "C", global = true, value_delimiter = ',')]
    c_list: Option<Vec<f64>>,
    /// Number of solutions to look for (find) or largest K of the bound table (exponents)
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// Relative integration tolerance
    #[arg(long, global = true)]
    tol_rel: Option<f64>,
    /// Absolute integration tolerance
    #[arg(long, global = true)]
    tol_abs: Option<f64>,
    /// Bisection tolerance on C
    #[arg(long = "tol-C", global = true)]
    tol_c: Option<f64>,
    /// X beyond which an orbit counts as entering Q1
    #[arg(long, global = true)]
    x_big: Option<f64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Format of the data tables
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand, Clone, Copy)]
enum Mode {
    /// Critical exponents and multiplicity bounds
    Exponents,
    /// Critical points, eigenvalues and the exact reference orbits
    Portrait,
    /// Classify the orbits launched with the given C values
    Shoot,
    /// Search for connections with 0, 1, …, K−1 oscillations
    Find,
    /// Zero count of the linearization around the singular profile
    Lepin,
    /// Profile-equation residuals of exact and computed profiles
    Residuals,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let ov = Overrides {
        m: cli.m,
        dim: cli.dim,
        p: cli.p,
        c_list: cli.c_list,
        k: cli.k,
        tol_rel: cli.tol_rel,
        tol_abs: cli.tol_abs,
        tol_c: cli.tol_c,
        x_big: cli.x_big,
        out: cli.out,
        format: cli.format,
    };
    let cfg = ExperimentConfig::resolve(cli.config.as_deref(), ov)?;
    let mut sink = Sink::new(&cfg.out, cfg.format)?;
    match cli.mode {
        Mode::Exponents => modes::exponents(&cfg, &mut sink),
        Mode::Portrait => modes::portrait(&cfg, &mut sink),
        Mode::Shoot => modes::shoot(&cfg, &mut sink),
        Mode::Find => modes::find(&cfg, &mut sink),
        Mode::Lepin => modes::lepin(&cfg, &mut sink),
        Mode::Residuals => modes::residuals(&cfg, &mut sink),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.code() }
            });
            eprintln!("{record}");
            ExitCode::from(e.code())
        }
    }
}
