//! Command-line front end for the p.c.f. spectral pipeline.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 on usage,
//! input or I/O errors.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::Parser;

use crate::config::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
