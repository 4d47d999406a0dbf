//! Reproducible runs: one directory per run holding `report.json`,
//! `report.txt`, `metadata.json` and any field files.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;
use spacelike_core::error::Error;

use config::RunConfig;
use report::{failure_value, report_value, write, write_report, RunLock};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Schema(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => EXIT_SCHEMA,
            CliError::Io(_) => EXIT_IO,
        }
    }

    /// Errors while reading inputs: I/O stays I/O, anything else is a schema
    /// problem with the input.
    pub fn from_input(e: Error) -> Self {
        match e {
            Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Schema(other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "invalid configuration: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Execute a resolved run and return its exit code. Messages go to stderr.
pub fn run(cfg: &RunConfig) -> i32 {
    match run_inner(cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("spacelike: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(cfg: &RunConfig) -> Result<i32, CliError> {
    let input = commands::prepare(cfg)?;
    let _lock = RunLock::acquire(&cfg.out)?;
    let started = SystemTime::now();
    let clock = Instant::now();
    let (report, code) = match commands::run_command(cfg, input) {
        Ok(outcome) => {
            let code = if outcome.pass() { EXIT_OK } else { EXIT_CHECK_FAILED };
            (report_value(cfg, &outcome), code)
        }
        Err(Error::Io(e)) => return Err(CliError::Io(e.to_string())),
        Err(e) => (failure_value(cfg, &e.to_string()), EXIT_CHECK_FAILED),
    };
    write_report(&cfg.out, &report)?;
    let meta = json!({
        "command": cfg.command.name(),
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix": unix_seconds(started),
        "finished_unix": unix_seconds(SystemTime::now()),
        "elapsed_seconds": clock.elapsed().as_secs_f64(),
        "exit_code": code,
    });
    let meta = serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n";
    write(&cfg.out.join("metadata.json"), meta.as_bytes())?;
    if code != EXIT_OK {
        eprintln!("spacelike: checks failed, see {}", cfg.out.join("report.txt").display());
    }
    Ok(code)
}

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}
