//! `dkp-aim`: spectra, reference tables, wavefunctions and convergence
//! diagnostics for the DKP radial problems.

mod commands;
mod config;
mod error;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::error::{exit, CliError};
use crate::report::{Report, Status};

#[derive(Parser, Debug)]
#[command(
    name = "dkp-aim",
    version,
    about = "Asymptotic iteration method for DKP bound states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Energy levels from the closed form, the iteration or the oracle.
    Spectrum(RunConfig),
    /// Recompute an anharmonic perturbation table and diff it against the reference.
    ReproduceTable(RunConfig),
    /// Tabulate a closed-form radial wavefunction.
    Wavefunction(RunConfig),
    /// Root versus iteration depth, with its convergence classification.
    Diagnose(RunConfig),
}

type Handler = fn(&RunConfig) -> Result<Report, CliError>;

fn run(command: Command) -> Result<i32, CliError> {
    let (cfg, f): (RunConfig, Handler) = match command {
        Command::Spectrum(c) => (c, commands::spectrum),
        Command::ReproduceTable(c) => (c, commands::reproduce_table),
        Command::Wavefunction(c) => (c, commands::wavefunction),
        Command::Diagnose(c) => (c, commands::diagnose),
    };
    let cfg = cfg.resolve()?;
    if let Some(path) = &cfg.save_config {
        std::fs::write(path, cfg.to_kv())?;
    }
    let report = f(&cfg)?;
    let text = report.render(cfg.format.unwrap_or_default(), cfg.decimals)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(match report.status {
        Status::Ok => exit::OK,
        Status::Partial => exit::NUMERIC,
        Status::Mismatch => {
            for n in &report.notes {
                eprintln!("{n}");
            }
            exit::GOLDEN_MISMATCH
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => exit::OK,
                _ => exit::USAGE,
            };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
