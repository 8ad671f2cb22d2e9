//! Command-line front end: argument parsing, configuration and exports.

pub mod commands;
pub mod config;
pub mod format;

use std::ffi::OsString;
use std::io::Write;

use clap::{Parser, Subcommand};
use solvable_plane::pipeline::PipelineError;

use config::{RunConfig, Settings};

/// Failure of a run, carrying its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid `{field}`: {message}")]
    Config { field: String, message: String },
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    OverTolerance(String),
}

impl CliError {
    pub fn config(field: &str, message: impl Into<String>) -> CliError {
        CliError::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn runtime(e: impl std::fmt::Display) -> CliError {
        CliError::Runtime(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config { .. } => 2,
            CliError::OverTolerance(_) => 3,
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> CliError {
        match e {
            PipelineError::BadHorizon(_) => CliError::config("t_max", e.to_string()),
            PipelineError::BadGrid(_) => CliError::config("grid", e.to_string()),
            PipelineError::InitialCollision(_) => CliError::config("x2", e.to_string()),
            PipelineError::InitialNearOrigin(_) => CliError::config("x1", e.to_string()),
            other => CliError::runtime(other),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "solvable-plane",
    version,
    about = "Algebraically solvable planar polynomial flows"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an initial value problem and write the trajectory.
    Solve(Settings),
    /// Compare the closed form against the integrator and write a report.
    Verify(Settings),
    /// Print the synthesized x-system.
    Generate(Settings),
    /// Print the divisibility condition report of a coefficient flow.
    CheckCondition(Settings),
    /// Write period-closure reports for the isochronized system.
    Isochrony(Settings),
    /// Write the trajectory in real two-vector form.
    Vectorize(Settings),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Verify(_) => "verify",
            Command::Generate(_) => "generate",
            Command::CheckCondition(_) => "check-condition",
            Command::Isochrony(_) => "isochrony",
            Command::Vectorize(_) => "vectorize",
        }
    }

    fn into_settings(self) -> Settings {
        match self {
            Command::Solve(s)
            | Command::Verify(s)
            | Command::Generate(s)
            | Command::CheckCondition(s)
            | Command::Isochrony(s)
            | Command::Vectorize(s) => s,
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status. Normal output goes to `out`, warnings and errors to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let name = cli.command.name();
    let result = RunConfig::resolve(cli.command.into_settings(), name).and_then(|rc| {
        for w in &rc.warnings {
            let _ = writeln!(err, "warning: {w}");
        }
        commands::execute(name, &rc, out, err)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
