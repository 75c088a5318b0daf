//! Regenerates the derived fixture file from its oracles.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use sca_core::fixtures::{
    check_drift, committed_path, generate, read_fixtures, to_csv_string, FixtureGrid,
};

#[derive(Debug, Parser)]
#[command(
    name = "sca-fixtures",
    about = "Regenerate or verify the derived fixture file"
)]
struct Cli {
    /// Fixture file (defaults to the one committed with sca-core)
    #[arg(long, global = true)]
    path: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Recompute every fixture and overwrite the file
    Write,
    /// Recompute every fixture and report drift from the file
    Check {
        /// Replace every committed tolerance (relative) with this value
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    let path = cli.path.unwrap_or_else(committed_path);
    let regenerated = generate(&FixtureGrid::default())?;
    match cli.command {
        Cmd::Write => {
            fs::write(&path, to_csv_string(&regenerated)?)
                .with_context(|| format!("cannot write {}", path.display()))?;
            println!("wrote {} fixtures to {}", regenerated.len(), path.display());
            Ok(true)
        }
        Cmd::Check { tolerance } => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let mut committed = read_fixtures(text.as_bytes())?;
            if let Some(t) = tolerance {
                for r in &mut committed {
                    r.tolerance = t;
                }
            }
            let problems = check_drift(&committed, &regenerated);
            for p in &problems {
                println!("drift: {p}");
            }
            println!(
                "{} fixtures checked, {} drifted",
                committed.len(),
                problems.len()
            );
            Ok(problems.is_empty())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
