//! Batch driver behind the `rpp` binary.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod verify;

use clap::Parser;
use symplectic_core::RppError;

use crate::args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Run(#[from] RppError),
    #[error("verification failed: {0}")]
    Verify(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Run(e) if e.is_numerical() => EXIT_NUMERICAL,
            CliError::Run(_) => EXIT_CONFIG,
            CliError::Verify(_) => EXIT_VERIFY,
        }
    }
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run(argv: Vec<String>) -> Result<(), CliError> {
    let argv = config::expand_args(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Config(e.render().to_string().trim_end().to_string())),
    };
    match cli.threads {
        Some(0) => Err(CliError::Config("threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))?
            .install(|| dispatch(&cli.command)),
        None => dispatch(&cli.command),
    }
}

fn dispatch(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Lyapunov(a) => commands::lyapunov(a),
        Command::SpectrumScan(a) => commands::spectrum_scan(a),
        Command::Rpp(a) => commands::rpp(a),
        Command::Formula(a) => commands::formula(a),
        Command::Verify(a) => {
            let report = verify::run_verify(a.level, a.seed.unwrap_or(config::DEFAULT_SEED), a.fault);
            for c in &report.checks {
                println!("{}", c.line());
            }
            let failed: Vec<String> = report.failures().iter().map(|c| c.id.clone()).collect();
            if failed.is_empty() {
                println!("verify: all {} checks passed", report.checks.len());
                Ok(())
            } else {
                Err(CliError::Verify(failed.join(", ")))
            }
        }
    }
}
