//! `stoploss`: survival functions, stop-loss premiums and ruin probabilities
//! of compound distributions, written as CSV.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

mod commands;
mod config;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stoploss_core::inversion::EulerParams;
use stoploss_core::methods::{Method, Quantity};

use commands::Table;
use config::{Grid, Overrides, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) => m,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<stoploss_core::Error> for CliError {
    fn from(e: stoploss_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(name = "stoploss", version, about = "Compound distribution tails, stop-loss premiums and ruin probabilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Survival function P(S > x) over a grid.
    Sf(RunArgs),
    /// Stop-loss premium E(S - a)+ over a grid of priorities.
    Slp(RunArgs),
    /// Ruin probability from zero reserve over a horizon grid.
    Ruin {
        #[command(flatten)]
        run: RunArgs,
        /// Infinite-horizon ruin probability over a reserve grid instead.
        #[arg(long)]
        infinite: bool,
    },
    /// Inversion accuracy against the Pascal-exponential closed form.
    Table {
        #[arg(long, value_enum)]
        which: Table,
        /// Inversion contour damping.
        #[arg(long, default_value_t = commands::TABLE_EULER.a)]
        a: f64,
        /// Order of the Euler average.
        #[arg(long, default_value_t = commands::TABLE_EULER.m1)]
        m1: usize,
        /// First partial sum in the Euler average.
        #[arg(long, default_value_t = commands::TABLE_EULER.m2)]
        m2: usize,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expansion coefficients q_k and mixture weights p_k.
    Coeffs(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON model document.
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated methods: ortho, laplace, truncation, exact, mc.
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    /// Linear grid start:stop:count, endpoints included.
    #[arg(long)]
    grid: Option<Grid>,
    /// Expansion order.
    #[arg(long = "K")]
    order: Option<usize>,
    /// Explicit basis shape (needs --m).
    #[arg(long)]
    r: Option<f64>,
    /// Explicit basis scale (needs --r).
    #[arg(long)]
    m: Option<f64>,
    /// Exponential tilt of an explicit basis.
    #[arg(long)]
    theta: Option<f64>,
    /// Inversion contour damping.
    #[arg(long)]
    a: Option<f64>,
    /// Order of the Euler average.
    #[arg(long)]
    m1: Option<usize>,
    /// First partial sum in the Euler average.
    #[arg(long)]
    m2: Option<usize>,
    /// Monte Carlo sample size.
    #[arg(long = "mc-n")]
    mc_n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(self) -> Result<RunConfig, CliError> {
        let overrides = Overrides {
            methods: self.method,
            grid: self.grid,
            order: self.order,
            r: self.r,
            m: self.m,
            theta: self.theta,
            a: self.a,
            m1: self.m1,
            m2: self.m2,
            mc_n: self.mc_n,
            seed: self.seed,
            out: self.out,
        };
        RunConfig::load(&self.config, overrides)
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sf(args) => {
            let rc = args.load()?;
            emit(rc.out.as_ref(), &commands::curve(&rc, Quantity::Sf)?)
        }
        Command::Slp(args) => {
            let rc = args.load()?;
            emit(rc.out.as_ref(), &commands::curve(&rc, Quantity::Slp)?)
        }
        Command::Ruin { run, infinite } => {
            let rc = run.load()?;
            emit(rc.out.as_ref(), &commands::ruin(&rc, infinite)?)
        }
        Command::Table { which, a, m1, m2, out } => {
            let t = commands::table(which, &EulerParams::new(a, m1, m2)?)?;
            if let Some(path) = &out {
                emit(Some(path), &t.csv)?;
            }
            emit(None, &t.pretty)
        }
        Command::Coeffs(args) => {
            let rc = args.load()?;
            let c = commands::coeffs(&rc)?;
            emit(rc.out.as_ref(), &c.csv)?;
            eprint!("{}", c.summary);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
