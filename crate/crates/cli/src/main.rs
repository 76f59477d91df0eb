//! `quantizer`: reproducible checks and tables over CP^n.
//!
//! Exit status: 0 when every check passes, 1 when a numerical check fails,
//! 2 for usage or configuration errors.

mod commands;
mod config;
mod report;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use quantizer_core::Error as CoreError;

use crate::commands::UsageError;
use crate::config::{Cli, RunConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn is_usage(err: &anyhow::Error) -> bool {
    if err.is::<UsageError>() || err.is::<std::io::Error>() {
        return true;
    }
    if let Some(e) = err.downcast_ref::<CoreError>() {
        return matches!(
            e,
            CoreError::InvalidArgument(_)
                | CoreError::InvalidLoop(_)
                | CoreError::InvalidChart { .. }
                | CoreError::DimensionMismatch { .. }
                | CoreError::NegativeDegree(_)
                | CoreError::DomainViolation(_)
        );
    }
    err.chain().any(|c| c.is::<std::io::Error>())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig {
        command: cli.command,
        common: cli.common,
    };
    if let Err(msg) = cfg.validate() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let report = match commands::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {} failed: {e:#}", cfg.command.name());
            return ExitCode::from(if is_usage(&e) { EXIT_USAGE } else { EXIT_FAIL });
        }
    };
    let bytes = match report::render(&report, &cfg) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_FAIL);
        }
    };
    let written = match &cfg.common.out {
        Some(path) => fs::write(path, &bytes),
        None => std::io::stdout().write_all(&bytes),
    };
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        eprintln!("{}: check failed", cfg.command.name());
        ExitCode::from(EXIT_FAIL)
    }
}
