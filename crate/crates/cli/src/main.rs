//! `spincourt` — command-line front end for qubit-ensemble preparation
//! experiments: tomographic comparison of two preparations, two
//! judge-mediated dispute protocols run as repeated trials, and parameter
//! sweeps.
//!
//! Exit codes: 0 on success, 2 for configuration/usage errors, 3 for
//! runtime failures (e.g. the output file cannot be written).

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{CommandKind, OutputFormat, Overrides};

#[derive(Parser)]
#[command(
    name = "spincourt",
    version,
    about = "Qubit-ensemble tomography and dispute-protocol experiments",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare two preparations' statistics over a 26-direction grid
    Tomography(RunArgs),
    /// Axis dispute: Alice commits an axis, Charles demonstrates his
    DisputeA(RunArgs),
    /// Margin dispute: Charles must beat a committed match fraction
    DisputeB(RunArgs),
    /// Re-run a dispute across a grid of one parameter's values
    Sweep(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the TOML experiment configuration
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Master seed (overrides the file)
    #[arg(long)]
    seed: Option<u64>,
    /// Trials per estimate (overrides the file)
    #[arg(long)]
    trials: Option<u64>,
    /// Output file (default: $SPINCOURT_OUT_DIR/<scenario>.<ext>, else stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Output format (overrides the file)
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Tomography(args) => (CommandKind::Tomography, args),
        Command::DisputeA(args) => (CommandKind::DisputeA, args),
        Command::DisputeB(args) => (CommandKind::DisputeB, args),
        Command::Sweep(args) => (CommandKind::Sweep, args),
    };
    let overrides = Overrides {
        seed: args.seed,
        trials: args.trials,
        out: args.out.clone(),
        format: args.format,
    };

    let experiment = match config::load(&args.config, kind, &overrides) {
        Ok(experiment) => experiment,
        Err(err) => {
            eprintln!("configuration error: {err:#}");
            return ExitCode::from(2);
        }
    };

    match run(&experiment) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}

fn run(experiment: &config::Experiment) -> Result<()> {
    let report = commands::execute(experiment);
    let rendered = report.render(experiment.format == OutputFormat::Structured);
    match config::resolve_out_path(experiment) {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).with_context(|| {
                        format!("cannot create output directory {}", parent.display())
                    })?;
                }
            }
            std::fs::write(&path, rendered)
                .with_context(|| format!("cannot write report to {}", path.display()))?;
            eprintln!("{}", report.summary());
            eprintln!("report written to {}", path.display());
        }
        None => {
            print!("{rendered}");
            eprintln!("{}", report.summary());
        }
    }
    Ok(())
}
