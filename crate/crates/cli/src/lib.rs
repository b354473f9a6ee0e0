//! File formats and subcommands of the `valforme` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod render;
pub mod report;
pub mod table;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::commands::{run, Cli, Io};
use crate::error::exit;
use crate::render::Precision;

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { exit::INPUT } else { exit::OK };
        }
    };
    let outcome = Precision::from_env().and_then(|precision| run(cli, &mut Io { stdout, stderr, precision }));
    match outcome {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
