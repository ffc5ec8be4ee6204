//! `pinsker` — exact Pinsker quantities and Monte Carlo risk verification for
//! inner-product kernel regression on the sphere.
//!
//! Exit codes: 0 success, 1 verification failure, 2 configuration error,
//! 3 numeric failure.

mod commands;
mod config;
mod svg;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CommonArgs;
use config::{exit_code_for, RunConfig};

#[derive(Parser)]
#[command(name = "pinsker", version, about = "Pinsker bounds for inner-product kernel regression on S^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Shared {
    /// Configuration document (TOML or JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output path (stdout when omitted).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format override: csv, json, or svg (per command).
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
    /// Suppress informational output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue table of the configured kernel on S^d.
    Spectrum(Shared),
    /// Solve for kappa*, N, the filter weights, and D*.
    Pinsker(Shared),
    /// Rate and constant curves over a gamma grid.
    Curves(Shared),
    /// Monte Carlo excess risk of the filter estimator against D*.
    Simulate {
        #[command(flatten)]
        shared: Shared,
        /// Replication count override.
        #[arg(long)]
        reps: Option<usize>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the invariant suite; exits 1 on any failed check.
    Verify {
        #[command(flatten)]
        shared: Shared,
        /// Dimensions for the convergence section, e.g. "100,500,2000".
        #[arg(long, value_name = "LIST")]
        d_grid: Option<String>,
        /// Seed override for the randomized checks.
        #[arg(long)]
        seed: Option<u64>,
        /// Debug: dump the explicit harmonic basis "d,k" (k <= 2) as JSON
        /// instead of running the suite.
        #[arg(long, value_name = "D,K")]
        dump_basis: Option<String>,
    },
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("PINSKER_THREADS") {
        if let Ok(k) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err) as u8)
        }
    }
}

fn run(cli: Cli) -> pinsker_core::Result<ExitCode> {
    let shared = match &cli.command {
        Command::Spectrum(s) | Command::Pinsker(s) | Command::Curves(s) => s,
        Command::Simulate { shared, .. } | Command::Verify { shared, .. } => shared,
    };
    let config = RunConfig::load(&shared.config)?;
    let common = CommonArgs {
        out: shared.out.clone(),
        format: shared.format.clone(),
        quiet: shared.quiet,
    };
    match cli.command {
        Command::Spectrum(_) => commands::cmd_spectrum(&config, &common)?,
        Command::Pinsker(_) => commands::cmd_pinsker(&config, &common)?,
        Command::Curves(_) => commands::cmd_curves(&config, &common)?,
        Command::Simulate { reps, seed, .. } => {
            commands::cmd_simulate(&config, &common, reps, seed)?
        }
        Command::Verify {
            d_grid,
            seed,
            dump_basis,
            ..
        } => {
            if let Some(spec) = dump_basis {
                let (d, k) = spec.split_once(',').ok_or_else(|| {
                    pinsker_core::Error::InvalidConfig(format!(
                        "bad --dump-basis {spec:?}; expected e.g. 3,2"
                    ))
                })?;
                let parse = |v: &str| {
                    v.trim().parse::<usize>().map_err(|_| {
                        pinsker_core::Error::InvalidConfig(format!("bad --dump-basis {spec:?}"))
                    })
                };
                commands::cmd_dump_basis(&common, parse(d)?, parse(k)?)?;
                return Ok(ExitCode::SUCCESS);
            }
            let grid = match d_grid {
                Some(text) => Some(parse_d_grid(&text)?),
                None => None,
            };
            let all_passed = commands::cmd_verify(&config, &common, grid, seed)?;
            if !all_passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_d_grid(text: &str) -> pinsker_core::Result<Vec<usize>> {
    let grid: Result<Vec<usize>, _> = text
        .split(',')
        .map(|v| v.trim().parse::<usize>())
        .collect();
    grid.map_err(|_| {
        pinsker_core::Error::InvalidConfig(format!("bad --d-grid {text:?}; expected e.g. 100,500"))
    })
}
