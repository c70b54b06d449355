// SPDX-License-Identifier: Apache-2.0

//! Command-line surface. `main` is a thin wrapper over [`main_with_args`].

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::CliError;
use crate::presets;
use crate::runner::{load, run, validate, RunOptions};

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "CLSIM_OUT";

#[derive(Parser)]
#[command(
    name = "clsim",
    version,
    about = "Time-dependent cathodoluminescence spectra of multi-level emitters"
)]
struct Cli {
    /// Output directory
    #[arg(long, global = true, env = OUT_ENV)]
    out: Option<PathBuf>,

    /// Worker threads (default: logical cores)
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override the spectrum quadrature step h
    #[arg(long, global = true)]
    step: Option<f64>,

    /// No progress output
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a JSON experiment
    Run { source: String },
    /// Check a preset or JSON experiment without running it
    Validate { source: String },
    /// Print an embedded preset document
    ShowPreset { name: String },
    /// List embedded presets
    ListPresets,
}

/// Parse, dispatch and report; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    if cli.workers == Some(0) {
        return Err(CliError::ValidationFailed("--workers must be at least 1".into()));
    }
    let opts = RunOptions {
        out: cli.out.clone(),
        workers: cli.workers,
        step: cli.step,
        quiet: cli.quiet,
    };
    match &cli.command {
        Command::Run { source } => {
            let cfg = load(source)?;
            let written = run(&cfg, &opts)?;
            if !cli.quiet {
                for p in &written {
                    println!("{}", p.display());
                }
            }
        }
        Command::Validate { source } => {
            let cfg = load(source)?;
            for line in validate(&cfg, cli.step)? {
                println!("{line}");
            }
        }
        Command::ShowPreset { name } => match presets::preset(name) {
            Some(doc) => print!("{doc}"),
            None => return Err(CliError::UnknownPreset(name.clone(), presets::names().join(", "))),
        },
        Command::ListPresets => {
            for n in presets::names() {
                println!("{n}");
            }
        }
    }
    Ok(())
}
