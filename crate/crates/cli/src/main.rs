//! `vpb <subcommand> --config <path> [--out <dir>]`
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 budget exceeded. Worker threads come from `VPB_THREADS` (default 1).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vpb_core::harness::{self, Experiment};
use vpb_core::VpbError;

#[derive(Parser)]
#[command(name = "vpb", version, about = "Two-species Vlasov-Poisson-Boltzmann numerical lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Space-homogeneous relaxation of two Maxwellians.
    Relax(RunArgs),
    /// Smoke-scale inhomogeneous kinetic run.
    Kinetic(RunArgs),
    /// Navier-Stokes-Poisson run around the rarefaction wave.
    Fluid(RunArgs),
    /// Smooth rarefaction profiles and decay rates.
    Wave(RunArgs),
    /// Viscosity and heat conduction from the linearized operator.
    Transport(RunArgs),
    /// Positivity sweep of the stability matrix.
    Matrix(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides out_dir from the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(experiment: Experiment, args: RunArgs) -> Result<PathBuf, VpbError> {
    let mut text = std::fs::read_to_string(&args.config)
        .map_err(|e| VpbError::Configuration(format!("cannot read {}: {e}", args.config.display())))?;
    // The subcommand supplies the experiment when the file leaves it out;
    // appending keeps the file's line numbers intact.
    let names_experiment =
        text.lines().any(|l| l.split('#').next().unwrap_or("").trim_start().starts_with("experiment"));
    if !names_experiment {
        text.push_str(&format!("\nexperiment = {}\n", experiment.as_str()));
    }
    let cfg = harness::parse_config(&text)?;
    if cfg.experiment != experiment {
        return Err(VpbError::Configuration(format!(
            "config is for '{}' but the subcommand is '{}'",
            cfg.experiment.as_str(),
            experiment.as_str()
        )));
    }
    let out = args
        .out
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(experiment.as_str()));
    let threads = harness::threads_from_env()?;
    harness::with_threads(threads, || harness::run_experiment(&cfg, &out))??;
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Relax(a) => (Experiment::Relax, a),
        Command::Kinetic(a) => (Experiment::Kinetic, a),
        Command::Fluid(a) => (Experiment::Fluid, a),
        Command::Wave(a) => (Experiment::Wave, a),
        Command::Transport(a) => (Experiment::Transport, a),
        Command::Matrix(a) => (Experiment::Matrix, a),
    };
    match run(experiment, args) {
        Ok(out) => {
            eprintln!("vpb {}: wrote {}", experiment.as_str(), out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("vpb {}: {e}", experiment.as_str());
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}
