//! `mwdyn`: scenario runner for multiplicative-weights dynamics.
//!
//! Exit codes: 0 converged (or analysis finished), 1 iteration cap reached, 2 invalid input,
//! 3 step-rule failure.

mod commands;
mod scenario;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "mwdyn",
    version,
    about = "Multiplicative-weights dynamics on population games"
)]
struct Cli {
    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for every randomized step (random starts, ESS sampling, random flows).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress summary lines.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a scenario file and export its trajectory as CSV.
    Simulate { scenario: PathBuf },
    /// Wardrop flow, stability verdict and periodic orbits of a parallel-link system.
    AnalyzeRouting {
        system: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Periodic-orbit counts of the two-link Hedge map across learning rates.
    ChaosScan {
        system: PathBuf,
        /// Comma-separated rates.
        #[arg(
            long,
            value_delimiter = ',',
            conflicts_with = "alpha_range",
            required_unless_present = "alpha_range"
        )]
        alphas: Vec<f64>,
        /// `start:stop:count`, evenly spaced and inclusive.
        #[arg(long)]
        alpha_range: Option<String>,
        #[arg(long, default_value_t = 3)]
        max_period: usize,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Fixed-point, Nash and sampled ESS classification of a candidate state.
    Verify {
        game: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        candidate: Vec<f64>,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = mwdyn::analysis::DEFAULT_TOL)]
        tol: f64,
    },
    /// Invasion, barrier and deployability of flow `x` against `y` or against random flows.
    Dominance {
        network: PathBuf,
        /// Comma-separated path flows, or `wardrop` for parallel links.
        #[arg(long)]
        x: String,
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        y: Option<String>,
        /// Number of seeded random opponents.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 101)]
        grid: usize,
    },
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Intervals of the sign-change scan.
    #[arg(long, default_value_t = 20_000)]
    grid: usize,
    /// Bisection tolerance for orbit points.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

/// Failure to read, parse or validate an input; always exit code 2.
#[derive(Debug)]
pub struct InputError(pub String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.to_string())
    }
}

pub struct Context {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub quiet: bool,
}

impl Context {
    /// Writes the primary output to `--out`, or to standard output.
    pub fn emit(&self, content: &str) -> Result<(), InputError> {
        match &self.out {
            Some(p) => write_file(p, content),
            None => {
                io::stdout().write_all(content.as_bytes())?;
                Ok(())
            }
        }
    }

    /// Prints a summary line unless `--quiet`; it goes to stderr when the primary output
    /// occupies stdout.
    pub fn summary(&self, line: &str, stdout_busy: bool) {
        if self.quiet {
            return;
        }
        if stdout_busy {
            eprintln!("{line}");
        } else {
            println!("{line}");
        }
    }

    pub fn require_seed(&self, what: &str) -> Result<u64, InputError> {
        self.seed
            .ok_or_else(|| InputError(format!("{what} is randomized; pass --seed")))
    }
}

pub fn write_file(path: &Path, content: &str) -> Result<(), InputError> {
    fs::write(path, content).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<u8, InputError> {
    let ctx = Context {
        out: cli.out,
        seed: cli.seed,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Simulate { scenario } => scenario::simulate(&ctx, &scenario),
        Command::AnalyzeRouting {
            system,
            alpha,
            scan,
        } => commands::analyze_routing(&ctx, &system, alpha, scan.grid, scan.tol).map(|_| 0),
        Command::ChaosScan {
            system,
            alphas,
            alpha_range,
            max_period,
            scan,
        } => {
            let alphas = match alpha_range {
                Some(r) => commands::parse_range(&r)?,
                None => alphas,
            };
            commands::chaos_scan(&ctx, &system, &alphas, max_period, scan.grid, scan.tol).map(|_| 0)
        }
        Command::Verify {
            game,
            candidate,
            radius,
            samples,
            tol,
        } => commands::verify(&ctx, &game, candidate, radius, samples, tol).map(|_| 0),
        Command::Dominance {
            network,
            x,
            y,
            random,
            grid,
        } => commands::dominance(&ctx, &network, &x, y.as_deref(), random, grid).map(|_| 0),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
