//! Command-line runner: trajectory reconstruction, phase-diagram sweeps,
//! bath correlation functions, and the validation suite.
//!
//! Exit codes: 0 success, 1 validation/run failure, 2 configuration error,
//! 3 engine capability refusal.

mod commands;
mod config;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Config;

#[derive(Parser)]
#[command(name = "spinbath", version, about = "Emitter-in-a-spin-chain dynamics and non-Markovianity toolkit")]
struct Cli {
    /// Configuration file (flat key=value with [system]/[environment]/[run]).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a single configuration key (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker-pool size for sweeps (0 = all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Sampling step in units of 1/J.
    #[arg(long, global = true, value_name = "DT")]
    dt: Option<f64>,
    /// Final time in units of 1/J.
    #[arg(long, global = true, value_name = "T")]
    tfin: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Reconstruct the dynamical map and its non-Markovianity summary.
    Trajectory,
    /// Sweep (Delta_h, Omega) and tabulate the divisibility degree.
    PhaseDiagram,
    /// Compute bath correlation functions and memory kernels.
    Correlations,
    /// Run the cross-engine, oracle, and invariant validation suites.
    Validate,
}

/// Run-level failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure { code: 2, message: msg.into() }
    }
}

impl From<config::ConfigError> for Failure {
    fn from(e: config::ConfigError) -> Self {
        Failure::config(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, message: format!("i/o error: {e}") }
    }
}

impl From<spinbath::Error> for Failure {
    fn from(e: spinbath::Error) -> Self {
        let code = match e {
            spinbath::Error::DenseCap { .. } | spinbath::Error::Unsupported(_) => 3,
            spinbath::Error::InvalidSpec(_) => 2,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn build_config(cli: &Cli) -> Result<Config, Failure> {
    let mut cfg = Config::default();
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
        cfg.apply_file(&text, &path.display().to_string())?;
    }
    for assignment in &cli.sets {
        cfg.apply_set(assignment)?;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if let Some(dt) = cli.dt {
        cfg.dt = dt;
    }
    if let Some(tfin) = cli.tfin {
        cfg.t_fin = tfin;
    }
    if cfg.dt <= 0.0 || cfg.t_fin <= 0.0 {
        return Err(Failure::config("dt and t_fin must be positive"));
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build_config(&cli) {
        Ok(c) => c,
        Err(f) => {
            eprintln!("{}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let result = match cli.cmd {
        Cmd::Trajectory => commands::run_trajectory(&cfg),
        Cmd::PhaseDiagram => commands::run_phase_diagram(&cfg),
        Cmd::Correlations => commands::run_correlations(&cfg),
        Cmd::Validate => validate::run_validate(&cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
