//! Command-line front end: `sp`, `wsp`, `rmeasure` and `energy`.
//!
//! Exit codes: 0 success (including runs stopped by the iteration cap), 2 usage
//! errors, 3 data errors, 4 infeasible CV target.

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod config;
pub mod data;
pub mod manifest;
pub mod seeds;

pub use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

/// Invalid invocation detected after argument parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<wsp_core::Error>() {
            return match e {
                wsp_core::Error::InfeasibleCv { .. } => EXIT_INFEASIBLE,
                wsp_core::Error::InvalidParameter(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            };
        }
    }
    EXIT_DATA
}

pub fn execute(command: &Command) -> anyhow::Result<()> {
    match command {
        Command::Sp(a) => commands::cmd_sp(a).map(drop),
        Command::Wsp(a) => commands::cmd_wsp(a).map(drop),
        Command::Rmeasure(a) => commands::cmd_rmeasure(a).map(drop),
        Command::Energy(a) => commands::cmd_energy(a).map(drop),
    }
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args = match config::expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}
