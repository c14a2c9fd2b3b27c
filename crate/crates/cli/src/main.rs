use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "nvrelax", version, about = "NV-centre T1 relaxometry: simulate, fit, calibrate")]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,
    /// Stretch exponent handling; overrides the config.
    #[arg(long, global = true, value_enum)]
    beta: Option<Beta>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Beta {
    Fixed,
    Free,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate the ensemble decay for the configured bath.
    Simulate,
    /// Fit a stretched exponential to a decay CSV.
    Fit {
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
    },
    /// Sweep Gd³⁺ concentration and record T1 at each point.
    Response {
        /// Na⁺ background, mol/L; overrides the config.
        #[arg(long = "c-na", value_name = "MOLAR")]
        c_na: Option<f64>,
    },
    /// Fit adsorption parameters to a T1-versus-concentration dataset.
    Calibrate {
        #[arg(long, value_name = "CSV")]
        input: PathBuf,
    },
    /// Simulate a photon-counting differential measurement and fit it.
    SynthMeasure {
        /// Decay CSV to measure instead of simulating one.
        #[arg(long, value_name = "CSV")]
        input: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
