//! `aoa`: bearing-only localization from the command line.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical/geometry error,
//! 4 threshold failure under `campaign --check`.

mod commands;
mod config;
mod error;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BenchArgs, CampaignArgs, EstimateArgs, SingleEstimator, SynthArgs};
use error::CliResult;

#[derive(Parser)]
#[command(name = "aoa", version, about = "Bearing-only source localization and Monte Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate a source from a measurement file (`x y az` or `x y z az el` per line).
    Estimate {
        file: PathBuf,
        /// Force the dimension instead of inferring it from the column count.
        #[arg(long)]
        dim: Option<usize>,
        /// Known azimuth noise standard deviation (radians); estimated from the data if omitted.
        #[arg(long)]
        sigma_a: Option<f64>,
        /// Known elevation noise standard deviation (radians, 3-D only).
        #[arg(long)]
        sigma_e: Option<f64>,
        #[arg(long, value_enum, default_value = "two-step")]
        estimator: SingleEstimator,
        /// Gauss-Newton iterations for the two-step estimator.
        #[arg(long, default_value_t = 1)]
        gn_iters: usize,
        /// Angles in the file are in degrees.
        #[arg(long)]
        degrees: bool,
    },
    /// Run Monte Carlo campaigns from a TOML config and/or built-in presets.
    Campaign {
        config: Option<PathBuf>,
        /// Built-in preset to run (repeatable).
        #[arg(long = "preset")]
        presets: Vec<String>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the number of runs of every scenario.
        #[arg(long)]
        runs: Option<usize>,
        /// Write the summary CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write every per-run estimate to this CSV.
        #[arg(long)]
        dump: Option<PathBuf>,
        /// Exit with status 4 unless the results meet the efficiency thresholds.
        #[arg(long)]
        check: bool,
        /// List the built-in presets and exit.
        #[arg(long)]
        list_presets: bool,
        /// Print the resolved scenarios as a config file and exit.
        #[arg(long)]
        print_config: bool,
    },
    /// Time the estimators over a scenario's n sweep (median of repeated runs).
    Bench {
        config: Option<PathBuf>,
        #[arg(long = "preset")]
        presets: Vec<String>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic measurement file drawn from a preset's geometry.
    Synth {
        #[arg(long)]
        preset: String,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let seed = std::env::var("AOA_SEED").ok();
    match cli.command {
        Command::Estimate { file, dim, sigma_a, sigma_e, estimator, gn_iters, degrees } => {
            let report = commands::estimate(&EstimateArgs { file, dim, sigma_a, sigma_e, estimator, gn_iters, degrees })?;
            print!("{report}");
        }
        Command::Campaign { config, presets, jobs, runs, out, dump, check, list_presets, print_config } => {
            if list_presets {
                print!("{}", commands::list_presets());
                return Ok(());
            }
            let args = CampaignArgs { config, presets, jobs, runs, out, dump, check };
            if print_config {
                print!("{}", commands::resolved_config(&args, seed.as_deref())?);
                return Ok(());
            }
            commands::campaign(&args, seed.as_deref())?;
        }
        Command::Bench { config, presets, reps, out } => {
            commands::bench(&BenchArgs { config, presets, reps, out }, seed.as_deref())?;
        }
        Command::Synth { preset, n, seed, out } => commands::synth(&SynthArgs { preset, n, seed, out })?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("aoa: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
