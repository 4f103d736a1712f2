//! `comaction` command-line front end.
//!
//! Exit codes: 0 success or commuting, 1 non-commuting, 2 inconclusive,
//! 3 usage or input error, 4 solver failure.

mod args;
mod commands;
mod format;

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{Cli, Command, Format};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NON_COMMUTING: u8 = 1;
pub const EXIT_INCONCLUSIVE: u8 = 2;
pub const EXIT_USAGE: u8 = 3;
pub const EXIT_SOLVER: u8 = 4;

#[derive(Debug)]
pub(crate) enum CliError {
    Usage(String),
    Library(comaction::Error),
    Write(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use comaction::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Write(_) => EXIT_SOLVER,
            CliError::Library(e) => match e {
                E::UnknownSystem(_)
                | E::InvalidParameter { .. }
                | E::Parse { .. }
                | E::InvalidGrid(_)
                | E::DimensionMismatch { .. }
                | E::InvalidArgument(_)
                | E::HorizonExceeded { .. }
                | E::OutsideDomain(_) => EXIT_USAGE,
                _ => EXIT_SOLVER,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Write(m) => f.write_str(m),
            CliError::Library(e) => e.fmt(f),
        }
    }
}

impl From<comaction::Error> for CliError {
    fn from(e: comaction::Error) -> Self {
        CliError::Library(e)
    }
}

/// A finished command: the report document, a one-line summary and the
/// exit code it implies.
pub(crate) struct Outcome {
    pub json: String,
    pub value: serde_json::Value,
    pub summary: String,
    pub code: u8,
}

impl Outcome {
    pub fn new<T: serde::Serialize>(doc: &T, summary: String, code: u8) -> Self {
        Self {
            json: serde_json::to_string_pretty(doc).expect("documents serialize"),
            value: serde_json::to_value(doc).expect("documents serialize"),
            summary,
            code,
        }
    }
}

fn emit(outcome: &Outcome, output: &args::OutputArgs) -> Result<(), CliError> {
    let mut body = match output.format {
        Format::Json => outcome.json.clone(),
        Format::Text => format::text(&outcome.value),
    };
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match &output.out {
        Some(path) => {
            fs::write(path, body).map_err(|e| CliError::Write(format!("cannot write {}: {e}", path.display())))?;
            println!("{}", outcome.summary);
        }
        None => {
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| CliError::Write(format!("cannot write to standard output: {e}")))?;
        }
    }
    Ok(())
}

/// Parse `args` (program name first), run the command and return the exit
/// code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let result = commands::execute(&cli.command).and_then(|outcome| {
        emit(&outcome, commands::output_args(&cli.command))?;
        Ok(outcome.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
