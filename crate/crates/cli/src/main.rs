//! `homogenizer`: deterministic sweeps over the qubit homogenizer.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 usage error, 3 resource cap,
//! 4 invariant breach or failed self-test.

mod commands;
mod config;
mod output;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use homogenizer::{selftest, Error};

use config::{Cli, Command, RunConfig};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
    Io(std::io::Error),
    Checks(Vec<u8>),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Usage(_) | Failure::Core(Error::Argument(_)) => 2,
            Failure::Core(Error::Resource { .. }) => 3,
            Failure::Core(Error::Invariant(_)) | Failure::Checks(_) => 4,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "usage error: {msg}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
            Failure::Checks(ids) => write!(f, "self-test failed: criteria {ids:?}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn emit(config: &RunConfig, body: &str, sidecar: Option<&str>) -> Result<(), Failure> {
    match &config.output {
        Some(path) => {
            std::fs::write(path, body)?;
            if let Some(meta) = sidecar {
                std::fs::write(sidecar_path(path), meta)?;
            }
        }
        None => {
            std::io::stdout().lock().write_all(body.as_bytes())?;
            if let Some(meta) = sidecar {
                std::io::stderr().lock().write_all(meta.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn run_selftest(config: &RunConfig) -> Result<(), Failure> {
    let outcomes = selftest::run_all();
    let body: String = outcomes.iter().map(|o| format!("{o}\n")).collect();
    emit(config, &body, None)?;
    let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Checks(failed))
    }
}

fn run(config: &RunConfig) -> Result<(), Failure> {
    if config.command == Command::Selftest {
        return run_selftest(config);
    }
    let table = commands::run(config)?;
    let rendered = output::render(&table, config);
    emit(config, &rendered.body, rendered.sidecar.as_deref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests also arrive here, with exit code 0.
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = RunConfig::resolve(cli).and_then(|config| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| Failure::Usage(format!("cannot start {} threads: {e}", config.threads)))?;
        pool.install(|| run(&config))
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // A closed downstream pipe (`| head`) is not an error of ours.
        Err(Failure::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("homogenizer: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
