//! Command-line front end for the `qnd` simulations.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

use config::{read_file_config, resolve, Command, FileConfig, Overrides, ScheduleKind};

#[derive(Debug, Error, PartialEq)]
pub enum CliError {
    /// Bad configuration or arguments: exit status 2.
    #[error("invalid configuration: {0}")]
    Validation(String),
    /// The run itself failed a physical or numerical check: exit status 1.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numerical(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<qnd::Error> for CliError {
    fn from(e: qnd::Error) -> Self {
        use qnd::Error::*;
        match e {
            NotNormalized(_) | NotPositiveSemidefinite(_) | RankDeficient(_) | DimensionMismatch { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "qnd",
    version,
    about = "Dynamically decoupled QND probing of spin-1 ensembles"
)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML file with run parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV destination; a `.manifest` file is written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Decoupling order.
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ScheduleKind>,
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("qnd: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => read_file_config(path)?,
        None => FileConfig::default(),
    };
    let overrides = Overrides {
        output: cli.out.clone(),
        seed: cli.seed,
        p: cli.p,
        schedule: cli.mode,
    };
    let cfg = resolve(cli.command, file, overrides)?;
    let report = commands::run(&cfg)?;
    let csv = report.table.to_csv()?;
    match &cfg.output {
        Some(path) => {
            output::write_file(path, &csv)?;
            output::write_file(&output::manifest_path(path), &output::manifest(&cfg))?;
        }
        None => {
            std::io::stdout()
                .write_all(csv.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    match report.failure {
        Some(why) => Err(CliError::Numerical(why)),
        None => Ok(()),
    }
}
