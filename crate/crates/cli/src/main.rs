//! `bemest`: build lumped-RC building models, simulate synthetic truth,
//! cluster the dynamics and run full or per-cluster Kalman filters.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunConfig, Settings};

#[derive(Parser)]
#[command(name = "bemest", version, about = "Zonal temperature and load estimation for multi-zone buildings")]
struct Cli {
    /// TOML file with default values for any of the flags below.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,

    #[command(flatten)]
    settings: Settings,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Check a building file and print derived R/C values and state counts.
    Validate,
    /// Integrate the model under known loads and write truth and noisy measurements.
    Simulate,
    /// Cluster the design-flow dynamics into weakly connected subsystems.
    Cluster,
    /// Run the full (`--mode full`) or per-cluster (`--mode wcs`) filter.
    Estimate,
    /// Run both filters and write the divergence series and timings.
    Compare,
    /// Time both filters on a generated or given building; fails unless WCS is faster.
    Bench,
    /// Write a synthetic building with weather, HVAC and load inputs.
    Generate,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Simulate => "simulate",
            Command::Cluster => "cluster",
            Command::Estimate => "estimate",
            Command::Compare => "compare",
            Command::Bench => "bench",
            Command::Generate => "generate",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => match Settings::from_file(path) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => Settings::default(),
    };
    let rc = RunConfig::resolve(cli.command.name(), cli.settings.over(file));
    let result = match cli.command {
        Command::Validate => commands::validate(&rc),
        Command::Simulate => commands::simulate(&rc),
        Command::Cluster => commands::cluster(&rc),
        Command::Estimate => commands::estimate(&rc),
        Command::Compare => commands::compare(&rc),
        Command::Bench => commands::bench(&rc),
        Command::Generate => commands::generate(&rc),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
