//! `bernstein`: estimates, asymptotic expansions and verification runs for
//! Bernstein estimators on the simplex.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 when a lattice would
//! exceed the size guard.

mod commands;

use std::io::{IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bernstein_core::EstimatorKind;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "bernstein", version, about = "Bernstein estimators on the unit simplex")]
struct Cli {
    /// Worker threads for parallel sums and Monte Carlo replicates.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate an estimator from a data CSV at the points of another CSV.
    Estimate {
        /// Observations, one row per point, d columns, optional header.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        m: u64,
        #[arg(long, value_parser = parse_kind)]
        kind: EstimatorKind,
        /// Evaluation points in the same layout as the data.
        #[arg(long)]
        points: PathBuf,
    },
    /// Print the leading bias, variance, MSE and optimal order as JSON.
    Theory {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a Monte Carlo experiment and compare it with the expansions.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Also write the results CSV to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact pmf power sums or min-coupling sums next to their limits.
    Sums {
        /// Profile as a JSON file or inline JSON, with 1-based keys.
        #[arg(long)]
        profile: String,
        /// Comma-separated orders.
        #[arg(long, value_delimiter = ',', required = true)]
        m_grid: Vec<u64>,
        #[arg(long, value_enum, default_value_t = Table::SquareSum)]
        table: Table,
        /// Coordinate (1-based) for the coupling table.
        #[arg(long, default_value_t = 1)]
        coordinate: usize,
    },
    /// Multinomial central moment, closed form next to enumeration.
    Moments {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        m: u64,
        /// Comma-separated coordinates of x.
        #[arg(long, value_delimiter = ',', required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
        /// Comma-separated 1-based coordinate indices, 2 to 4 of them.
        #[arg(long, value_delimiter = ',', required = true)]
        indices: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Table {
    SquareSum,
    Coupling,
}

fn parse_kind(s: &str) -> Result<EstimatorKind, String> {
    s.parse().map_err(|e: bernstein_core::Error| e.to_string())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let size = err
        .chain()
        .filter_map(|e| e.downcast_ref::<bernstein_core::Error>())
        .any(bernstein_core::Error::is_size_limit);
    if size {
        2
    } else {
        1
    }
}

fn report(err: &anyhow::Error) {
    let stderr = std::io::stderr();
    let color = std::env::var_os("NO_COLOR").map_or(true, |v| v.is_empty()) && stderr.is_terminal();
    let prefix = if color { "\x1b[31merror\x1b[0m" } else { "error" };
    let _ = writeln!(stderr.lock(), "{prefix}: {err:#}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            report(&anyhow::anyhow!("--threads must be at least 1"));
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            report(&e.into());
            return ExitCode::from(1);
        }
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match commands::run(cli.command, &mut out).and_then(|()| Ok(out.flush()?)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(exit_code(&e))
        }
    }
}
