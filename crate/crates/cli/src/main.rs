//! `tovlab`: verification, classification, critical scans, pressure solving,
//! and tail certificates for the closed-form TOV solution catalog.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage/config error.

mod cli;
mod commands;
mod config;
mod jobs;
mod report;

use std::process::ExitCode;

use clap::Parser;

use crate::cli::{Cli, Command};
use crate::commands::Outcome;

fn run(args: Cli) -> anyhow::Result<Outcome> {
    let cfg = config::resolve(&args.global)?;
    match &args.command {
        Command::Verify { rows, params, grid_points } => {
            commands::cmd_verify(rows, params.params(), *grid_points, &cfg)
        }
        Command::Classify { row, params, plot, grid_points } => {
            commands::cmd_classify(row, params.params(), plot.as_deref(), *grid_points, &cfg)
        }
        Command::Scan { row, param, from, to, steps, params } => {
            commands::cmd_scan(row, param, *from, *to, *steps, params.params(), &cfg)
        }
        Command::Solve { row, params, c0, grid_points } => {
            commands::cmd_solve(row, params.params(), *c0, *grid_points, &cfg)
        }
        Command::Tails { rows, params } => commands::cmd_tails(rows, params.params(), &cfg),
        Command::CatalogDump => commands::cmd_catalog_dump(&cfg),
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match run(args) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
