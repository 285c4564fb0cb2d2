//! `sctherm`: scenario runner for the strong-coupling thermodynamics library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 I/O error.

// Validation guards use `!(x > 0)` so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod csvout;
mod scenarios;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig, Scenario};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(sctherm::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

/// Strong-coupling thermodynamics of a qubit in a composite spin-boson
/// reservoir: internal energy, entropy, heat, entropy production and
/// non-Markovianity diagnostics, exported as CSV (and optionally SVG).
#[derive(Parser)]
#[command(name = "sctherm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonFlags {
    /// TOML configuration file (flags override file values).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (default "out").
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Also render SVG charts.
    #[arg(long)]
    svg: bool,
    /// Number of time-grid points.
    #[arg(long, value_name = "N")]
    grid_points: Option<usize>,
    /// Maximum time in units of 1/γ(ω₀+κ).
    #[arg(long, value_name = "X")]
    t_max: Option<f64>,
    /// Comma-separated inverse temperatures.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// Comma-separated weak-coupling scaling parameters (figS1).
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    c_list: Option<Vec<f64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Internal energy and entropy production, ground-state start.
    Fig1(CommonFlags),
    /// Weak-coupling convergence sweep over the scaling parameter c.
    #[command(name = "figS1")]
    FigS1(CommonFlags),
    /// Internal-energy comparison against the mean-force functional.
    #[command(name = "figS2")]
    FigS2(CommonFlags),
    /// Mean-force entropy production at κ = 0.95 (product-thermal start).
    #[command(name = "figS3")]
    FigS3(CommonFlags),
    /// Fully configurable run (initial state, drive, model parameters).
    Custom(CommonFlags),
    /// Negative entropy-production-rate intervals with a CP-divisibility
    /// cross-check.
    Witness(CommonFlags),
}

fn run(scenario: Scenario, flags: &CommonFlags) -> Result<(), CliError> {
    let file = match &flags.config {
        Some(path) => Some(config::load_file(path)?),
        None => None,
    };
    let overrides = Overrides {
        out: flags.out.clone(),
        svg: flags.svg,
        grid_points: flags.grid_points,
        t_max: flags.t_max,
        betas: flags.beta.clone(),
        c_list: flags.c_list.clone(),
    };
    let cfg = RunConfig::resolve(scenario, file, &overrides)?;
    if !cfg.model.is_resonant() {
        eprintln!(
            "warning: off-resonant configuration (omega0 = {}, omega1 = {}); \
             the closed-form eigenoperators do not apply and driven generators \
             are built numerically",
            cfg.model.omega0, cfg.model.omega1
        );
    }
    match cfg.scenario {
        Scenario::Fig1 => scenarios::run_fig1(&cfg),
        Scenario::FigS1 => scenarios::run_fig_s1(&cfg),
        Scenario::FigS2 => scenarios::run_fig_s2(&cfg),
        Scenario::FigS3 => scenarios::run_fig_s3(&cfg),
        Scenario::Custom => scenarios::run_custom(&cfg),
        Scenario::Witness => scenarios::run_witness(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, flags) = match &cli.command {
        Command::Fig1(f) => (Scenario::Fig1, f),
        Command::FigS1(f) => (Scenario::FigS1, f),
        Command::FigS2(f) => (Scenario::FigS2, f),
        Command::FigS3(f) => (Scenario::FigS3, f),
        Command::Custom(f) => (Scenario::Custom, f),
        Command::Witness(f) => (Scenario::Witness, f),
    };
    match run(scenario, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sctherm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
