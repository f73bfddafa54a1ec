mod bench;
mod committee;
mod gen;
mod output;
mod solve;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::output::Failure;

/// Budget-constrained committee selection with approximate core guarantees.
#[derive(Debug, Parser)]
#[command(name = "alphacore", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a committee and write a JSON report.
    Solve(solve::SolveArgs),
    /// Compute the smallest alpha for which a committee is in the alpha-core.
    Verify(verify::VerifyArgs),
    /// Generate an instance file.
    Gen(gen::GenArgs),
    /// Solve and verify a seeded family of instances, one CSV row per run.
    Bench(bench::BenchArgs),
}

/// Sizes the global thread pool from `ALPHACORE_WORKERS`.
fn configure_workers() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("ALPHACORE_WORKERS") else {
        return Ok(());
    };
    let workers: usize = raw.trim().parse().map_err(|_| {
        Failure::usage(format!(
            "ALPHACORE_WORKERS must be a positive integer, got `{raw}`"
        ))
    })?;
    if workers == 0 {
        return Err(Failure::usage("ALPHACORE_WORKERS must be positive"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot size worker pool: {e}")))
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    configure_workers()?;
    match cli.command {
        Command::Solve(a) => solve::run(a),
        Command::Verify(a) => verify::run(a),
        Command::Gen(a) => gen::run(a),
        Command::Bench(a) => bench::run(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
