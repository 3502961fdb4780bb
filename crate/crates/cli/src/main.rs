use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use imgsim_core::experiments::{load_run_options, run_experiment, Subcommand};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    SimulateBeamsteer,
    SimulateSwitched,
    Reconstruct,
    CompareMethods,
    PsfSweep,
    BreakpointFit,
    TwoReflector,
    Resolution,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::SimulateBeamsteer => Subcommand::SimulateBeamsteer,
            Command::SimulateSwitched => Subcommand::SimulateSwitched,
            Command::Reconstruct => Subcommand::Reconstruct,
            Command::CompareMethods => Subcommand::CompareMethods,
            Command::PsfSweep => Subcommand::PsfSweep,
            Command::BreakpointFit => Subcommand::BreakpointFit,
            Command::TwoReflector => Subcommand::TwoReflector,
            Command::Resolution => Subcommand::Resolution,
        }
    }
}

/// Beam-steered vs switched mm-wave imaging experiments.
///
/// IMGSIM_THREADS caps the worker threads (0 or unset = all cores).
#[derive(Debug, Parser)]
#[command(name = "imgsim", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// key = value config file
    #[arg(long)]
    config: PathBuf,
    /// scene file (.csv or .pgm) or builtin: t-target, two-point, point
    #[arg(long)]
    scene: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// reflector separation for the two-point scene, metres
    #[arg(long)]
    sep: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn thread_cap() -> Result<usize, String> {
    match std::env::var("IMGSIM_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| format!("IMGSIM_THREADS must be a non-negative integer, got `{v}`")),
    }
}

fn run(cli: Cli) -> Result<(), String> {
    let threads = thread_cap()?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| e.to_string())?;
    let mut opts = load_run_options(&cli.config, cli.scene, cli.seed, cli.out)
        .map_err(|e| format!("{}: {e}", cli.config.display()))?;
    if let Some(sep) = cli.sep {
        opts.config.separation_m = sep;
    }
    let files = run_experiment(cli.command.into(), &opts).map_err(|e| e.to_string())?;
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("imgsim: error: {e}");
            ExitCode::FAILURE
        }
    }
}
